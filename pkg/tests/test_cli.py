import csv
import hashlib
import json
import math

import pytest

from ltgp_sysid.cli import main, render_summary
from ltgp_sysid.dataio import (
    SynthSpec,
    build_input_series,
    generate_synthetic,
    parse_catalog_csv,
    write_synth_spec,
)
from ltgp_sysid.model import make_second_order
from ltgp_sysid.scenarios import run_scenario1


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _all_files(root):
    return {p.relative_to(root).as_posix() for p in root.rglob("*") if p.is_file()}


@pytest.fixture
def spec_file(tmp_path):
    spec = SynthSpec(
        make_second_order(0.95, 0.02, -0.01, 0.9, 0.8, 0.5), n_samples=3000, event_rate=20.0, seed=1
    )
    path = tmp_path / "spec.txt"
    path.write_text(write_synth_spec(spec))
    return path


@pytest.fixture
def synth_dir(tmp_path, spec_file):
    out = tmp_path / "synth"
    assert main(["synth", str(spec_file), "--out", str(out)]) == 0
    return out


def test_synth_outputs(synth_dir):
    assert {"ltgp.csv", "catalog.csv", "truth.txt", "spec.txt", "manifest.json"} <= _all_files(synth_dir)
    assert len(_rows(synth_dir / "ltgp.csv")) == 3000 + 1
    assert len(parse_catalog_csv((synth_dir / "catalog.csv").read_bytes())) == 60


def test_synth_same_seed_same_checksums(tmp_path, spec_file, synth_dir):
    again = tmp_path / "again"
    main(["synth", str(spec_file), "--out", str(again)])
    m1 = json.loads((synth_dir / "manifest.json").read_text())["files"]
    m2 = json.loads((again / "manifest.json").read_text())["files"]
    assert m1 == m2


def test_synth_seed_flag_overrides(tmp_path, spec_file, synth_dir):
    other = tmp_path / "other"
    main(["synth", str(spec_file), "--out", str(other), "--seed", "99"])
    assert (other / "catalog.csv").read_bytes() != (synth_dir / "catalog.csv").read_bytes()
    assert "seed = 99" in (other / "spec.txt").read_text()


def test_manifest_declares_every_file(synth_dir, tmp_path):
    out = tmp_path / "id"
    main(["identify", str(synth_dir / "ltgp.csv"), str(synth_dir / "catalog.csv"),
          "--out", str(out), "--svg"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == _all_files(out) - {"manifest.json"}
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert "wall_clock_s" in manifest and manifest["command"][1] == "identify"


@pytest.mark.parametrize("order", ["2", "4"])
def test_identify_noise_free_is_perfect(synth_dir, tmp_path, order):
    out = tmp_path / f"id{order}"
    code = main(["identify", str(synth_dir / "ltgp.csv"), str(synth_dir / "catalog.csv"),
                 "--order", order, "--out", str(out), "--stride", "7"])
    assert code == 0
    fit = {r[0]: r for r in _rows(out / "fit.csv")[1:]}
    assert fit["ch0"][1] == "100.00" and fit["ch1"][1] == "100.00"
    n_train = 2000
    n_updates = n_train - int(order) // 2
    assert len(_rows(out / "trace.csv")) - 1 == math.ceil(n_updates / 7)
    params = dict(
        line.split(" = ") for line in (out / "model.txt").read_text().splitlines()
    )
    assert params["order"] == order
    if order == "2":
        assert float(params["a11"]) == pytest.approx(0.95, abs=1e-6)


def test_identify_free_run_mode(synth_dir, tmp_path):
    out = tmp_path / "fr"
    main(["identify", str(synth_dir / "ltgp.csv"), str(synth_dir / "catalog.csv"),
          "--mode", "free-run", "--train-len", "1500", "--out", str(out)])
    rows = _rows(out / "fit.csv")
    assert rows[1][4] == "free-run" and rows[1][3] == str(3000 - 1500 - 1)
    assert len(_rows(out / "predicted.csv")) - 1 == 3000 - 1500 - 1


def test_bad_order_is_usage_error(synth_dir, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["identify", str(synth_dir / "ltgp.csv"), str(synth_dir / "catalog.csv"),
              "--order", "3", "--out", str(tmp_path / "x")])
    assert info.value.code == 2


def test_runtime_error_line(tmp_path, synth_dir, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("hour_index,ch0,ch1\n0,1,1\n2,1,1\n")
    code = main(["identify", str(bad), str(synth_dir / "catalog.csv"), "--out", str(tmp_path / "o")])
    assert code == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert err[0].startswith("error: OrderingError: line 3:")


def test_scenario_missing_cells_exit_code(tmp_path, capsys):
    n = 2000
    ltgp = tmp_path / "ltgp.csv"
    ltgp.write_text("hour_index,ch0,ch1\n" + "".join(f"{k},{math.sin(k / 9)},{math.cos(k / 7)}\n" for k in range(n)))
    catalog = tmp_path / "catalog.csv"
    catalog.write_text(
        "no,point,date,distance_km,depth_km,longitude,latitude,magnitude\n"
        "1,500,1993-01-21,40,10,20.5,38.5,5.0\n"
        "2,1300,1993-02-24,40,10,20.6,38.6,5.2\n"
    )
    out = tmp_path / "s2"
    code = main(["scenario", "2", str(ltgp), str(catalog), "--out", str(out)])
    assert code == 3
    assert capsys.readouterr().err.startswith("error: MissingCells:")
    rows = _rows(out / "summary.csv")
    assert rows[0] == ["order", "area", "before", "after", "entire"]
    area2 = [r for r in rows if r[1] == "Area2"]
    assert area2 and all(r[2:] == ["", "", ""] for r in area2)
    area1 = [r for r in rows if r[1] == "Area1"]
    assert all(v for r in area1 for v in r[2:])
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == _all_files(out) - {"manifest.json"}


def test_summary_values_are_rounded_fit_reports():
    spec = SynthSpec(make_second_order(0.99, 0.01, 0.0, 0.98, 0.8, 0.5), n_samples=32000,
                     noise_std=0.05, drift_amplitude=1.0, seed=2)
    series, catalog = generate_synthetic(spec)
    report = run_scenario1(series, build_input_series(catalog, len(series)), catalog, orders=(2,))
    text = render_summary(report, (2,))
    rows = list(csv.reader(text.splitlines()))
    for label, value in rows[1:]:
        assert value == f"{round(report.cells[(label, 2)].fit.bfr_mean, 2):.2f}"


def test_custom_areas_file(tmp_path, synth_dir):
    areas = tmp_path / "areas.txt"
    areas.write_text("West 20 21 37 39.5\nEast 21 22.5 37 39.5\n")
    out = tmp_path / "s1"
    code = main(["scenario", "1", str(synth_dir / "ltgp.csv"), str(synth_dir / "catalog.csv"),
                 "--areas", str(areas), "--train-len", "2000", "--order", "4", "--out", str(out)])
    assert code == 0
    rows = _rows(out / "summary.csv")
    assert rows[0] == ["dataset", "order4_bfr"]
    assert [r[0] for r in rows[1:]] == ["Entire", "West", "East"]
