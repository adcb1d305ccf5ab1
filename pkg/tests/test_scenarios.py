import datetime as dt
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltgp_sysid.dataio import (
    Catalog,
    CatalogEvent,
    InputSeries,
    LtgpSeries,
    SynthSpec,
    build_input_series,
    generate_synthetic,
)
from ltgp_sysid.errors import ConfigError, EmptyDatasetError, RangeError
from ltgp_sysid.ident import RlsConfig
from ltgp_sysid.model import make_second_order
from ltgp_sysid.scenarios import (
    DEFAULT_AREAS,
    GeoArea,
    WindowConfig,
    assign_area,
    build_event_windows,
    default_areas,
    parse_areas,
    partition,
    run_scenario1,
    run_scenario2,
    split_dataset,
    train_length,
    window_ranges,
)


def _event(no, point, lon=21.0, lat=38.5, mag=5.0):
    return CatalogEvent(no, point, dt.date(1995, 1, 1), 10.0, 5.0, lon, lat, mag)


def _ramp_series(n):
    k = np.arange(n, dtype=float)
    return LtgpSeries(k, -k)


def test_default_areas_file_matches_constants():
    assert default_areas() == DEFAULT_AREAS


def test_assign_area_examples(table1):
    assert assign_area(table1.by_no(4), DEFAULT_AREAS) == "Area1"
    assert assign_area(table1.by_no(10), DEFAULT_AREAS) == "Area2"
    assert assign_area(table1.by_no(13), DEFAULT_AREAS) is None


def test_table1_partition(table1):
    groups = partition(table1, DEFAULT_AREAS)
    assert {k: {e.no for e in v} for k, v in groups.items()} == {
        "Area1": {4, 6, 8, 9, 15},
        "Area2": {2, 5, 10, 11, 12, 14},
        "Area3": {1, 3, 7, 16, 17, 18},
        None: {13},
    }


def test_every_event_in_at_most_one_area(table1):
    for e in table1:
        assert sum(a.contains(e.longitude, e.latitude) for a in DEFAULT_AREAS) <= 1


def test_closed_boxes_include_boundary():
    box = GeoArea("B", 20.0, 21.0, 38.0, 39.0)
    assert box.contains(20.0, 38.0) and box.contains(21.0, 39.0)
    assert not box.contains(21.0001, 38.5)


def test_overlapping_areas_rejected():
    areas = [GeoArea("A", 20, 21, 38, 39), GeoArea("B", 20.5, 22, 38.5, 40)]
    with pytest.raises(ConfigError):
        assign_area(_event(1, 0), areas)
    # sharing an edge is fine
    assign_area(_event(1, 0), [GeoArea("A", 20, 21, 38, 39), GeoArea("B", 20, 21, 39, 40)])


def test_area_bounds_validated():
    with pytest.raises(ConfigError):
        GeoArea("bad", 21, 20, 38, 39)


def test_parse_areas():
    areas = parse_areas("# comment\nA 20 21 38 39.5\n\nB, 21.5, 22.5, 38, 39\n")
    assert [a.name for a in areas] == ["A", "B"]
    assert areas[0].lat_max == 39.5
    with pytest.raises(ConfigError):
        parse_areas("A 20 21 38\n")
    with pytest.raises(ConfigError):
        parse_areas("A 20 21 38 39\nA 30 31 38 39\n")


def test_single_event_window():
    series = _ramp_series(1000)
    inp = InputSeries(np.zeros(1000))
    data = build_event_windows(series, inp, [_event(1, 500)], WindowConfig(168), "both")
    assert len(data) == 337
    assert data.ch0[0] == 500 - 168 and data.ch0[168] == 500 and data.ch0[-1] == 500 + 168


def test_side_windows():
    series = _ramp_series(100)
    inp = InputSeries(np.zeros(100))
    before = build_event_windows(series, inp, [_event(1, 50)], WindowConfig(5), "before")
    after = build_event_windows(series, inp, [_event(1, 50)], WindowConfig(5), "after")
    assert before.ch0.tolist() == [45, 46, 47, 48, 49, 50]
    assert after.ch0.tolist() == [50, 51, 52, 53, 54, 55]


@pytest.mark.parametrize("n_events, expected", [(5, 1685), (6, 2022)])
def test_disjoint_event_window_counts(n_events, expected):
    events = [_event(i, 400 + 1000 * i) for i in range(n_events)]
    series = _ramp_series(10000)
    data = build_event_windows(series, InputSeries(np.zeros(10000)), events, side="both")
    assert len(data) == expected


def test_window_errors():
    series = _ramp_series(400)
    inp = InputSeries(np.zeros(400))
    with pytest.raises(RangeError):
        build_event_windows(series, inp, [_event(1, 100)], side="both")
    with pytest.raises(EmptyDatasetError):
        build_event_windows(series, inp, [], side="both")


def test_input_sliced_with_channels():
    n = 2000
    cat = Catalog((_event(1, 700, mag=5.5), _event(2, 1200, mag=4.9)))
    inp = build_input_series(cat, n)
    data = build_event_windows(_ramp_series(n), inp, cat, WindowConfig(10), "both")
    assert data.input[10] == 5.5 and data.input[31] == 4.9
    assert np.count_nonzero(data.input) == 2
    assert data.ch0[10] == 700


@settings(max_examples=200)
@given(
    st.lists(st.integers(0, 500), min_size=1, max_size=8),
    st.integers(1, 40),
    st.sampled_from(["before", "after", "both"]),
)
def test_window_length_identity(points, w, side):
    concat = window_ranges(points, w, side, "concatenate")
    union = window_ranges(points, w, side, "union")
    n_concat = sum(hi - lo + 1 for lo, hi in concat)
    per_event = 2 * w + 1 if side == "both" else w + 1
    assert n_concat == len(points) * per_event
    n_union = sum(hi - lo + 1 for lo, hi in union)
    # brute force: distinct indices covered
    covered = set()
    for lo, hi in concat:
        covered.update(range(lo, hi + 1))
    assert n_union == len(covered)
    overlapping = any(concat[i + 1][0] <= concat[i][1] for i in range(len(concat) - 1))
    assert n_union <= n_concat
    assert (n_union == n_concat) == (not overlapping)


def test_area1_table1_windows_use_concatenation(table1):
    groups = partition(table1, DEFAULT_AREAS)
    series = _ramp_series(43824)
    inp = build_input_series(table1, 43824)
    concat = build_event_windows(series, inp, groups["Area1"], WindowConfig(168, "concatenate"))
    union = build_event_windows(series, inp, groups["Area1"], WindowConfig(168, "union"))
    assert len(concat) == 1685
    # events 8 and 9 are 39 h apart
    assert len(union) == 1685 - (2 * 168 + 1 - 39)


def test_split_exhaustive():
    rng = np.random.default_rng(0)
    series = LtgpSeries(*rng.normal(size=(2, 50)))
    data = series.with_input(InputSeries(np.zeros(50)))
    n_train = train_length(50, Fraction(2, 3))
    assert n_train == 33
    train, valid = split_dataset(data, n_train)
    assert np.array_equal(np.concatenate([train.ch0, valid.ch0]), data.ch0)
    assert np.array_equal(np.concatenate([train.input, valid.input]), data.input)
    assert len(train) + len(valid) == len(data)
    with pytest.raises(RangeError):
        split_dataset(data, 50)


def test_train_length_floor():
    assert train_length(1685, Fraction(2, 3)) == 1123
    assert train_length(2022, 2 / 3) == 1348
    assert train_length(3, 2 / 3) == 2


@pytest.fixture(scope="module")
def synthetic(table1):
    truth = make_second_order(0.95, 0.02, -0.01, 0.9, 0.8, 0.5)
    spec = SynthSpec(truth, n_samples=43824, seed=5)
    series, _ = generate_synthetic(spec, catalog=table1)
    return truth, series, build_input_series(table1, len(series))


def test_scenario1_cells_and_perfect_fit(synthetic, table1):
    truth, series, inp = synthetic
    report = run_scenario1(series, inp, table1, orders=(2,))
    assert set(report.cells) == {(lbl, 2) for lbl in ("Entire", "Area1", "Area2", "Area3")}
    entire = report.cells[("Entire", 2)]
    assert entire.fit.n_samples == 43824 - 30000 - 1
    assert len(entire.validation) == 13824
    assert entire.fit.bfr_per_channel == pytest.approx((100.0, 100.0), abs=1e-6)
    assert report.metadata["unassigned"] == [13]


def test_scenario1_requires_long_series(table1):
    series = _ramp_series(100)
    with pytest.raises(RangeError):
        run_scenario1(series, InputSeries(np.zeros(100)), Catalog(), train_len=100)


def test_scenario2_cells(synthetic, table1):
    _, series, inp = synthetic
    report = run_scenario2(series, inp, table1, orders=(2, 4))
    assert len(report.cells) == 18
    assert not report.missing()
    assert report.metadata["dataset_sizes"][("Area1", "entire")] == 1685
    cell = report.cells[("Area1", "entire", 2)]
    assert cell.n_train == 1123
    assert len(cell.validation) == 1685 - 1123


def test_scenario2_empty_area_is_reported_not_raised(synthetic, table1):
    _, series, inp = synthetic
    areas = DEFAULT_AREAS + (GeoArea("Ionian", 18.0, 19.0, 36.0, 37.0),)
    report = run_scenario2(series, inp, table1, areas, orders=(2,))
    assert report.missing() == [("Ionian", s, 2) for s in ("before", "after", "entire")]


def test_scenarios_are_deterministic(synthetic, table1):
    _, series, inp = synthetic
    cfg = RlsConfig(forgetting=0.999)
    a = run_scenario2(series, inp, table1, orders=(4,), rls=cfg)
    b = run_scenario2(series, inp, table1, orders=(4,), rls=cfg)
    for key in a.cells:
        ca, cb = a.cells[key], b.cells[key]
        assert ca.fit == cb.fit
        assert ca.model.params() == cb.model.params()
        assert np.array_equal(ca.traces[0].thetas, cb.traces[0].thetas)
