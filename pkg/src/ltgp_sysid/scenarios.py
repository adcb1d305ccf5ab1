"""Area partitioning, event windows and the two identification scenarios.

Scenario 1 trains on the first ``train_len`` hours of the full record and
validates on the rest, once with every catalog event as input ("Entire") and
once per area with only that area's events as input.

Scenario 2 builds, per area, datasets from the week before, the week after,
and both weeks around each assigned event, then trains on the leading
``train_fraction`` of each dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .dataio import Catalog, CatalogEvent, InputSeries, LtgpSeries, build_input_series
from .errors import ConfigError, EmptyDatasetError, RangeError
from .ident import ConvergenceTrace, IdentDataset, RlsConfig, identify
from .metrics import FitReport, evaluate
from .model import LtiModel

SIDES = ("before", "after", "both")
OVERLAP_POLICIES = ("concatenate", "union")
# scenario-2 column label for each window side
SIDE_LABELS = {"before": "before", "after": "after", "both": "entire"}


@dataclass(frozen=True)
class GeoArea:
    """Closed lon/lat box."""

    name: str
    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise ConfigError(f"area {self.name}: bounds must satisfy min < max")

    def contains(self, lon: float, lat: float) -> bool:
        return self.lon_min <= lon <= self.lon_max and self.lat_min <= lat <= self.lat_max

    def overlaps(self, other: "GeoArea") -> bool:
        # boxes sharing only an edge do not overlap
        return (
            self.lon_min < other.lon_max
            and other.lon_min < self.lon_max
            and self.lat_min < other.lat_max
            and other.lat_min < self.lat_max
        )


def parse_areas(text: str) -> tuple[GeoArea, ...]:
    """Read ``name lon_min lon_max lat_min lat_max`` lines; ``#`` starts a comment."""
    areas = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(",", " ").split()
        if not line:
            continue
        if len(line) != 5:
            raise ConfigError(f"line {lineno}: expected name and four bounds, got {raw!r}")
        try:
            bounds = [float(v) for v in line[1:]]
        except ValueError:
            raise ConfigError(f"line {lineno}: bounds must be numbers") from None
        areas.append(GeoArea(line[0], *bounds))
    check_areas(areas)
    return tuple(areas)


def default_areas() -> tuple[GeoArea, ...]:
    text = resources.files("ltgp_sysid.data").joinpath("areas.txt").read_text()
    return parse_areas(text)


DEFAULT_AREAS = (
    GeoArea("Area1", 20.0, 21.0, 38.0, 39.5),
    GeoArea("Area2", 21.5, 22.5, 38.0, 39.0),
    GeoArea("Area3", 20.0, 22.0, 37.0, 38.0),
)


def check_areas(areas) -> None:
    names = [a.name for a in areas]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate area names in {names}")
    for i, a in enumerate(areas):
        for b in areas[i + 1 :]:
            if a.overlaps(b):
                raise ConfigError(f"areas {a.name} and {b.name} overlap")


def assign_area(event: CatalogEvent, areas) -> str | None:
    """Name of the area containing the epicentre, or None if unassigned."""
    check_areas(areas)
    for area in areas:
        if area.contains(event.longitude, event.latitude):
            return area.name
    return None


def partition(catalog, areas) -> dict[str | None, list[CatalogEvent]]:
    """Events grouped by area name; unassigned events under ``None``."""
    check_areas(areas)
    groups: dict[str | None, list[CatalogEvent]] = {a.name: [] for a in areas}
    groups[None] = []
    for e in catalog:
        groups[assign_area(e, areas)].append(e)
    return groups


@dataclass(frozen=True)
class WindowConfig:
    half_width_hours: int = 168
    overlap_policy: str = "concatenate"

    def __post_init__(self):
        if self.half_width_hours < 1:
            raise ConfigError("half_width_hours must be >= 1")
        if self.overlap_policy not in OVERLAP_POLICIES:
            raise ConfigError(f"overlap_policy must be one of {OVERLAP_POLICIES}")


def window_ranges(points, half_width: int, side: str, policy: str = "concatenate"):
    """Inclusive ``(lo, hi)`` index ranges, in point order."""
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    lo_off = half_width if side in ("before", "both") else 0
    hi_off = half_width if side in ("after", "both") else 0
    ranges = [(p - lo_off, p + hi_off) for p in sorted(points)]
    if policy == "union":
        merged: list[tuple[int, int]] = []
        for lo, hi in ranges:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        ranges = merged
    return ranges


def build_event_windows(
    series: LtgpSeries,
    inputs: InputSeries,
    events,
    cfg: WindowConfig | None = None,
    side: str = "both",
) -> IdentDataset:
    """Concatenate the windows around ``events`` into one dataset.

    ``before`` takes ``[p - w, p]``, ``after`` ``[p, p + w]`` and ``both``
    ``[p - w, p + w]``. Windows that run off the series raise RangeError.
    """
    cfg = cfg or WindowConfig()
    events = list(events)
    if not events:
        raise EmptyDatasetError("no events to window")
    if len(inputs) != len(series):
        raise RangeError(f"input length {len(inputs)} != series length {len(series)}")
    ranges = window_ranges(
        [e.point for e in events], cfg.half_width_hours, side, cfg.overlap_policy
    )
    n = len(series)
    for lo, hi in ranges:
        if lo < 0 or hi >= n:
            raise RangeError(f"window [{lo}, {hi}] falls outside series of length {n}")
    idx = [i for lo, hi in ranges for i in range(lo, hi + 1)]
    return IdentDataset(series.ch0[idx], series.ch1[idx], inputs.values[idx])


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value).limit_denominator(10**6)


def split_dataset(data: IdentDataset, n_train: int) -> tuple[IdentDataset, IdentDataset]:
    """Leading ``n_train`` samples for training, the rest for validation."""
    if not 0 < n_train < len(data):
        raise RangeError(f"train length {n_train} must lie inside (0, {len(data)})")
    return data.slice(0, n_train), data.slice(n_train)


def train_length(n: int, fraction) -> int:
    return math.floor(n * _as_fraction(fraction))


@dataclass(frozen=True)
class Cell:
    """One identified and scored model."""

    key: tuple
    order: int
    model: LtiModel
    fit: FitReport
    traces: list[ConvergenceTrace]
    n_train: int
    validation: IdentDataset


@dataclass
class ScenarioReport:
    scenario: int
    cells: dict[tuple, Cell | None]
    metadata: dict = field(default_factory=dict)

    def missing(self) -> list[tuple]:
        return [k for k, c in self.cells.items() if c is None]


def _fit_cell(key, data, n_train, order, rls, mode) -> Cell:
    train, valid = split_dataset(data, n_train)
    model, traces = identify(train, order, rls)
    return Cell(key, order, model, evaluate(model, valid, mode), traces, n_train, valid)


def run_scenario1(
    series: LtgpSeries,
    inputs: InputSeries,
    catalog: Catalog,
    areas=DEFAULT_AREAS,
    orders=(2, 4),
    train_len: int = 30000,
    rls: RlsConfig | None = None,
    mode: str = "one-step",
) -> ScenarioReport:
    """Whole-record models: Entire plus one per area, for each order."""
    rls = rls or RlsConfig()
    n = len(series)
    if n <= train_len:
        raise RangeError(f"series length {n} must exceed train_len {train_len}")
    groups = partition(catalog, areas)
    datasets = {"Entire": series.with_input(inputs)}
    for area in areas:
        datasets[area.name] = series.with_input(build_input_series(groups[area.name], n))
    cells = {}
    for label, data in datasets.items():
        for order in orders:
            cells[(label, order)] = _fit_cell((label, order), data, train_len, order, rls, mode)
    meta = {
        "n_samples": n,
        "train_len": train_len,
        "n_validation": n - train_len,
        "areas": [a.name for a in areas],
        "events_per_area": {a.name: [e.no for e in groups[a.name]] for a in areas},
        "unassigned": [e.no for e in groups[None]],
        "rls": rls,
        "mode": mode,
    }
    return ScenarioReport(1, cells, meta)


def run_scenario2(
    series: LtgpSeries,
    inputs: InputSeries,
    catalog: Catalog,
    areas=DEFAULT_AREAS,
    cfg: WindowConfig | None = None,
    orders=(2, 4),
    train_fraction=Fraction(2, 3),
    rls: RlsConfig | None = None,
    mode: str = "one-step",
) -> ScenarioReport:
    """Event-window models per area for the before/after/both windows.

    An area without events yields ``None`` cells instead of failing.
    """
    rls = rls or RlsConfig()
    cfg = cfg or WindowConfig()
    groups = partition(catalog, areas)
    cells: dict[tuple, Cell | None] = {}
    sizes = {}
    for area in areas:
        events = groups[area.name]
        for side in SIDES:
            label = SIDE_LABELS[side]
            data = build_event_windows(series, inputs, events, cfg, side) if events else None
            sizes[(area.name, label)] = len(data) if data is not None else 0
            for order in orders:
                key = (area.name, label, order)
                if data is None:
                    cells[key] = None
                    continue
                n_train = train_length(len(data), train_fraction)
                cells[key] = _fit_cell(key, data, n_train, order, rls, mode)
    meta = {
        "window": cfg,
        "train_fraction": str(_as_fraction(train_fraction)),
        "dataset_sizes": sizes,
        "areas": [a.name for a in areas],
        "events_per_area": {a.name: [e.no for e in groups[a.name]] for a in areas},
        "unassigned": [e.no for e in groups[None]],
        "rls": rls,
        "mode": mode,
    }
    return ScenarioReport(2, cells, meta)
