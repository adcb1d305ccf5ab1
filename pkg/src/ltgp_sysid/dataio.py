"""Signal and catalog files, the hourly magnitude input, and synthetic data.

File formats
------------
``ltgp.csv``::

    hour_index,ch0,ch1
    0,0.12,-3.4
    ...

``catalog.csv``::

    no,point,date,distance_km,depth_km,longitude,latitude,magnitude

Synthetic spec files are flat ``key = value`` text whose keys are the
:class:`SynthSpec` field names. ``true_model`` lists the free parameters in
``LtiModel.params()`` order (6 values for order 2, 10 for order 4);
``magnitude_range`` holds two numbers.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError, NumericError, OrderingError, ParseError, RangeError, ShapeError
from .ident import IdentDataset
from .model import CHANNEL_STATES, LtiModel, from_params, simulate_free_run

LTGP_HEADER = ["hour_index", "ch0", "ch1"]
CATALOG_HEADER = [
    "no",
    "point",
    "date",
    "distance_km",
    "depth_km",
    "longitude",
    "latitude",
    "magnitude",
]
DEFAULT_START = dt.datetime(1993, 1, 1, 0, 0)

# lon/lat box used to place synthetic epicentres (covers the three study areas)
SYNTH_REGION = (20.0, 22.5, 37.0, 39.5)


@dataclass(frozen=True, eq=False)
class LtgpSeries:
    """Hourly two-channel geoelectric potential record starting at ``start``."""

    ch0: np.ndarray
    ch1: np.ndarray
    start: dt.datetime = DEFAULT_START

    def __post_init__(self):
        c0 = np.array(self.ch0, dtype=float).reshape(-1)
        c1 = np.array(self.ch1, dtype=float).reshape(-1)
        if c0.size != c1.size or c0.size < 1:
            raise ShapeError(f"channels must be non-empty and equal length ({c0.size}, {c1.size})")
        if not (np.all(np.isfinite(c0)) and np.all(np.isfinite(c1))):
            raise NumericError("LTGP channels must be finite")
        c0.setflags(write=False)
        c1.setflags(write=False)
        object.__setattr__(self, "ch0", c0)
        object.__setattr__(self, "ch1", c1)

    def __len__(self):
        return self.ch0.size

    def with_input(self, inputs: "InputSeries") -> IdentDataset:
        if len(inputs) != len(self):
            raise ShapeError(f"input length {len(inputs)} != series length {len(self)}")
        return IdentDataset(self.ch0, self.ch1, inputs.values)


@dataclass(frozen=True)
class CatalogEvent:
    no: int
    point: int
    date: dt.date
    distance_km: float
    depth_km: float
    longitude: float
    latitude: float
    magnitude: float

    def __post_init__(self):
        if self.point < 0:
            raise RangeError(f"event {self.no}: negative point {self.point}")
        if not self.magnitude > 0:
            raise RangeError(f"event {self.no}: magnitude must be positive")
        if abs(self.latitude) > 90 or abs(self.longitude) > 180:
            raise RangeError(f"event {self.no}: coordinates out of range")


@dataclass(frozen=True)
class Catalog:
    events: tuple[CatalogEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.point)))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def by_no(self, no: int) -> CatalogEvent:
        for e in self.events:
            if e.no == no:
                return e
        raise KeyError(no)


@dataclass(frozen=True, eq=False)
class InputSeries:
    """Hourly magnitude input; 0 marks an hour without an event."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise RangeError("input values must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def _text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        return data.decode("utf-8")
    return data


def _rows(data, header):
    reader = csv.reader(io.StringIO(_text(data)))
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    if [h.strip() for h in first] != header:
        raise ParseError(f"expected header {','.join(header)}", line=1)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        yield lineno, [f.strip() for f in row]


def _number(text, lineno, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line=lineno) from None
    if kind is float and not math.isfinite(value):
        raise NumericError(f"line {lineno}: non-finite value {text!r}")
    return value


def parse_ltgp_csv(data, start: dt.datetime = DEFAULT_START) -> LtgpSeries:
    ch0, ch1 = [], []
    for lineno, (idx, a, b) in _rows(data, LTGP_HEADER):
        hour = _number(idx, lineno, int)
        if hour != len(ch0):
            raise OrderingError(f"hour_index {hour}, expected {len(ch0)}", line=lineno)
        ch0.append(_number(a, lineno))
        ch1.append(_number(b, lineno))
    if not ch0:
        raise ShapeError("LTGP file has no samples")
    return LtgpSeries(np.array(ch0), np.array(ch1), start)


def write_ltgp_csv(series: LtgpSeries) -> str:
    lines = [",".join(LTGP_HEADER)]
    for k, (a, b) in enumerate(zip(series.ch0.tolist(), series.ch1.tolist())):
        lines.append(f"{k},{a!r},{b!r}")
    return "\n".join(lines) + "\n"


def parse_catalog_csv(data) -> Catalog:
    events = []
    for lineno, f in _rows(data, CATALOG_HEADER):
        try:
            date = dt.date.fromisoformat(f[2])
        except ValueError:
            raise ParseError(f"bad date {f[2]!r} (want yyyy-mm-dd)", line=lineno) from None
        try:
            events.append(
                CatalogEvent(
                    no=_number(f[0], lineno, int),
                    point=_number(f[1], lineno, int),
                    date=date,
                    distance_km=_number(f[3], lineno),
                    depth_km=_number(f[4], lineno),
                    longitude=_number(f[5], lineno),
                    latitude=_number(f[6], lineno),
                    magnitude=_number(f[7], lineno),
                )
            )
        except RangeError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return Catalog(tuple(events))


def write_catalog_csv(catalog: Catalog) -> str:
    lines = [",".join(CATALOG_HEADER)]
    for e in catalog:
        lines.append(
            f"{e.no},{e.point},{e.date.isoformat()},{e.distance_km!r},{e.depth_km!r},"
            f"{e.longitude!r},{e.latitude!r},{e.magnitude!r}"
        )
    return "\n".join(lines) + "\n"


def load_table1() -> Catalog:
    """The bundled 1993-1997 Western Greece catalog (18 events, M_s >= 4.8)."""
    text = resources.files("ltgp_sysid.data").joinpath("table1_catalog.csv").read_text()
    return parse_catalog_csv(text)


def build_input_series(catalog, length: int) -> InputSeries:
    """Hourly input: the largest magnitude at each event point, zero elsewhere."""
    values = np.zeros(int(length))
    for e in catalog:
        if e.point >= length:
            raise RangeError(f"event {e.no} at point {e.point} outside series of length {length}")
        values[e.point] = max(values[e.point], e.magnitude)
    return InputSeries(values)


def _as_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value))


def calendar_hours(start, end) -> int:
    """Hourly samples covering the inclusive day range ``start .. end``."""
    s, e = _as_date(start), _as_date(end)
    if e < s:
        raise RangeError(f"end {e} precedes start {s}")
    return ((e - s).days + 1) * 24


# -- synthetic data -----------------------------------------------------------


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic LTGP record with a known generating model.

    Attributes:
        true_model: Model driving the noise-free states.
        n_samples: Record length in hours.
        event_rate: Events per 1000 hours.
        magnitude_range: Uniform magnitude bounds ``(min, max)``.
        noise_std: White measurement noise added to both channels.
        drift_amplitude: Amplitude of a sinusoidal drift with period ``n_samples / 4``.
        seed: Seed for every random draw.
    """

    true_model: LtiModel
    n_samples: int = 43824
    event_rate: float = 5.0
    magnitude_range: tuple[float, float] = (2.5, 6.1)
    noise_std: float = 0.0
    drift_amplitude: float = 0.0
    seed: int = 42

    def __post_init__(self):
        lo, hi = (float(v) for v in self.magnitude_range)
        object.__setattr__(self, "magnitude_range", (lo, hi))
        if self.n_samples < 10:
            raise ConfigError(f"n_samples must be >= 10, got {self.n_samples}")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if not 0 < lo <= hi:
            raise ConfigError(f"magnitude_range must satisfy 0 < min <= max, got {(lo, hi)}")
        if self.event_rate < 0 or self.event_rate * self.n_samples / 1000 > self.n_samples:
            raise ConfigError(f"event_rate {self.event_rate} out of range")


_SPEC_KEYS = [f for f in SynthSpec.__dataclass_fields__]


def parse_synth_spec(text) -> SynthSpec:
    values = {}
    for lineno, raw in enumerate(_text(text).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _SPEC_KEYS:
            raise ConfigError(f"line {lineno}: expected '<field> = <value>', got {raw!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        values[key] = value.replace(",", " ").split()
    if "true_model" not in values:
        raise ConfigError("synth spec needs a true_model line")
    try:
        params = [float(v) for v in values.pop("true_model")]
        order = {6: 2, 10: 4}.get(len(params))
        if order is None:
            raise ConfigError(f"true_model needs 6 or 10 parameters, got {len(params)}")
        kwargs = {"true_model": from_params(order, params)}
        for key, vals in values.items():
            if key == "magnitude_range":
                if len(vals) != 2:
                    raise ConfigError("magnitude_range needs two values")
                kwargs[key] = (float(vals[0]), float(vals[1]))
            elif len(vals) != 1:
                raise ConfigError(f"{key} takes a single value")
            elif key in ("n_samples", "seed"):
                kwargs[key] = int(vals[0])
            else:
                kwargs[key] = float(vals[0])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return SynthSpec(**kwargs)


def write_synth_spec(spec: SynthSpec) -> str:
    params = " ".join(repr(v) for v in spec.true_model.params().values())
    lo, hi = spec.magnitude_range
    return (
        f"true_model = {params}\n"
        f"n_samples = {spec.n_samples}\n"
        f"event_rate = {spec.event_rate!r}\n"
        f"magnitude_range = {lo!r} {hi!r}\n"
        f"noise_std = {spec.noise_std!r}\n"
        f"drift_amplitude = {spec.drift_amplitude!r}\n"
        f"seed = {spec.seed}\n"
    )


def simulate_channels(
    model: LtiModel, inputs, noise_std: float = 0.0, drift_amplitude: float = 0.0, rng=None
) -> tuple[np.ndarray, np.ndarray]:
    """Drive ``model`` from a zero state and read out ch0/ch1 with noise and drift.

    Returns one sample per input value; sample k is the state after k inputs.
    """
    u = np.asarray(inputs, dtype=float).reshape(-1)
    n = u.size
    states = simulate_free_run(model, np.zeros(model.order), u[:-1]).states
    i0, i1 = CHANNEL_STATES[model.order]
    ch0, ch1 = states[:, i0].copy(), states[:, i1].copy()
    if drift_amplitude:
        drift = drift_amplitude * np.sin(2 * np.pi * np.arange(n) / (n / 4))
        ch0 += drift
        ch1 += drift
    if noise_std:
        rng = rng if rng is not None else np.random.default_rng()
        noise = rng.normal(0.0, noise_std, size=(2, n))
        ch0 += noise[0]
        ch1 += noise[1]
    return ch0, ch1


def _synthetic_catalog(spec: SynthSpec, rng, start: dt.datetime) -> Catalog:
    n_events = int(round(spec.event_rate * spec.n_samples / 1000.0))
    if n_events == 0:
        return Catalog()
    points = np.sort(rng.choice(spec.n_samples, size=n_events, replace=False))
    lo, hi = spec.magnitude_range
    mags = np.round(rng.uniform(lo, hi, size=n_events), 1)
    mags = np.clip(mags, max(lo, 0.1), None)
    lon0, lon1, lat0, lat1 = SYNTH_REGION
    lons = np.round(rng.uniform(lon0, lon1, size=n_events), 2)
    lats = np.round(rng.uniform(lat0, lat1, size=n_events), 2)
    dist = np.round(rng.uniform(10.0, 220.0, size=n_events), 0)
    depth = np.round(rng.uniform(1.0, 60.0, size=n_events), 1)
    events = [
        CatalogEvent(
            no=i + 1,
            point=int(p),
            date=(start + dt.timedelta(hours=int(p))).date(),
            distance_km=float(dist[i]),
            depth_km=float(depth[i]),
            longitude=float(lons[i]),
            latitude=float(lats[i]),
            magnitude=float(mags[i]),
        )
        for i, p in enumerate(points)
    ]
    return Catalog(tuple(events))


@dataclass(frozen=True)
class _Streams:
    events: np.random.Generator
    noise: np.random.Generator

    @classmethod
    def from_seed(cls, seed):
        a, b = np.random.SeedSequence(seed).spawn(2)
        return cls(np.random.default_rng(a), np.random.default_rng(b))


def generate_synthetic(
    spec: SynthSpec, catalog: Catalog | None = None, start: dt.datetime = DEFAULT_START
) -> tuple[LtgpSeries, Catalog]:
    """Sparse magnitude impulses driving ``spec.true_model``, plus noise and drift.

    If ``catalog`` is given its events drive the model instead of random draws.
    Events and noise come from independent streams of the same seed, so changing
    ``noise_std`` leaves the catalog untouched.
    """
    streams = _Streams.from_seed(spec.seed)
    if catalog is None:
        catalog = _synthetic_catalog(spec, streams.events, start)
    inputs = build_input_series(catalog, spec.n_samples)
    ch0, ch1 = simulate_channels(
        spec.true_model, inputs.values, spec.noise_std, spec.drift_amplitude, streams.noise
    )
    return LtgpSeries(ch0, ch1, start), catalog
