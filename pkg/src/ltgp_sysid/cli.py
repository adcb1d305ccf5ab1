"""Command-line entry point: ``ltgp-sysid {synth,identify,scenario}``.

Failures print one line ``error: <Type>: <message>`` to stderr and exit
nonzero (1 for errors, 2 for usage, 3 when scenario cells are missing).
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dataio
from .errors import LtgpError
from .ident import ConvergenceTrace, IdentDataset, RlsConfig, identify
from .metrics import MODES, FitReport, evaluate, simulate
from .model import LtiModel
from .scenarios import (
    OVERLAP_POLICIES,
    Cell,
    ScenarioReport,
    WindowConfig,
    default_areas,
    parse_areas,
    run_scenario1,
    run_scenario2,
    split_dataset,
    train_length,
)

DEFAULT_SEED = 42


class MissingCells(Exception):
    pass


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {("/".join(map(str, k)) if isinstance(k, tuple) else str(k)): _jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class OutputDir:
    """Every file the CLI emits goes through here so the manifest sees it."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def write(self, relpath: str, content) -> Path:
        data = content.encode("utf-8") if isinstance(content, str) else content
        path = self.root / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.files[relpath] = _sha256(data)
        return path

    def write_manifest(self, command, inputs, config, started, elapsed):
        manifest = {
            "command": command,
            "inputs": {str(p): _sha256(Path(p).read_bytes()) for p in inputs},
            "config": _jsonable(config),
            "out_dir": str(self.root),
            "started_utc": started,
            "wall_clock_s": round(elapsed, 3),
            "files": dict(sorted(self.files.items())),
        }
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# -- text renderers -----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_model(model: LtiModel) -> str:
    lines = [f"order = {model.order}"]
    lines += [f"{k} = {v!r}" for k, v in model.params().items()]
    lines.append(f"spectral_radius = {model.spectral_radius()!r}")
    return "\n".join(lines) + "\n"


def render_trace(model: LtiModel, traces: list[ConvergenceTrace]) -> str:
    names = model.param_names()
    header = ["step"] + names + ["sq_err_ch0", "sq_err_ch1"]
    lines = [",".join(header)]
    t0, t1 = traces
    for i, step in enumerate(t0.steps.tolist()):
        vals = t0.thetas[i].tolist() + t1.thetas[i].tolist()
        errs = [t0.sq_errors[step - 1], t1.sq_errors[step - 1]]
        lines.append(",".join([str(step)] + [repr(v) for v in vals + [float(e) for e in errs]]))
    return "\n".join(lines) + "\n"


def render_fit(fit: FitReport) -> str:
    lines = ["channel,bfr_percent,rmse,n_samples,mode"]
    for ch in range(2):
        lines.append(
            f"ch{ch},{_fmt(fit.bfr_per_channel[ch])},{fit.rmse_per_channel[ch]!r},"
            f"{fit.n_samples},{fit.mode}"
        )
    lines.append(f"mean,{_fmt(fit.bfr_mean)},,{fit.n_samples},{fit.mode}")
    return "\n".join(lines) + "\n"


def render_predicted(model: LtiModel, data: IdentDataset, mode: str) -> str:
    measured, pred = simulate(model, data, mode)
    y, yhat = measured.channels(), pred.channels()
    lines = ["sample,ch0,ch0_pred,ch1,ch1_pred"]
    for i in range(len(measured)):
        lines.append(
            f"{measured.start_index + i},{float(y[i, 0])!r},{float(yhat[i, 0])!r},"
            f"{float(y[i, 1])!r},{float(yhat[i, 1])!r}"
        )
    return "\n".join(lines) + "\n"


def _svg_plots(model, traces, data, mode) -> dict[str, bytes]:
    import io

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "ltgp-sysid"
    out = {}

    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    names = model.param_names()
    half = len(names) // 2
    for ax, tr, row_names in zip(axes, traces, (names[:half], names[half:])):
        for j, name in enumerate(row_names):
            ax.plot(tr.steps, tr.thetas[:, j], label=name)
        ax.legend(loc="upper right", fontsize="small")
    axes[-1].set_xlabel("RLS update")
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    out["trace.svg"] = buf.getvalue()

    measured, pred = simulate(model, data, mode)
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    x = np.arange(len(measured))
    for ch, ax in enumerate(axes):
        ax.plot(x, measured.channels()[:, ch], label=f"ch{ch} measured")
        ax.plot(x, pred.channels()[:, ch], label=f"ch{ch} {mode}", linestyle="--")
        ax.legend(loc="upper right", fontsize="small")
    axes[-1].set_xlabel("validation sample")
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    out["predicted.svg"] = buf.getvalue()
    return out


def write_fit_artifacts(out: OutputDir, prefix: str, model, traces, fit, valid, mode, svg):
    out.write(f"{prefix}model.txt", render_model(model))
    out.write(f"{prefix}trace.csv", render_trace(model, traces))
    out.write(f"{prefix}fit.csv", render_fit(fit))
    out.write(f"{prefix}predicted.csv", render_predicted(model, valid, mode))
    if svg:
        for name, data in _svg_plots(model, traces, valid, mode).items():
            out.write(f"{prefix}{name}", data)


# -- summaries ----------------------------------------------------------------


def _cell_value(cell: Cell | None) -> str:
    return "" if cell is None else _fmt(cell.fit.bfr_mean)


def render_summary(report: ScenarioReport, orders) -> str:
    if report.scenario == 1:
        labels = list(dict.fromkeys(k[0] for k in report.cells))
        lines = ["dataset," + ",".join(f"order{o}_bfr" for o in orders)]
        for label in labels:
            row = [_cell_value(report.cells[(label, o)]) for o in orders]
            lines.append(",".join([label] + row))
    else:
        areas = list(dict.fromkeys(k[0] for k in report.cells))
        lines = ["order,area,before,after,entire"]
        for o in orders:
            for area in areas:
                row = [_cell_value(report.cells[(area, side, o)]) for side in ("before", "after", "entire")]
                lines.append(",".join([str(o), area] + row))
    return "\n".join(lines) + "\n"


def render_cells(report: ScenarioReport) -> str:
    lines = [
        "cell,order,bfr_ch0,bfr_ch1,bfr_mean,rmse_ch0,rmse_ch1,n_train,n_eval,spectral_radius"
    ]
    for key, cell in report.cells.items():
        name = _cell_name(key)
        if cell is None:
            lines.append(f"{name},{key[-1]},,,,,,,,")
            continue
        f = cell.fit
        lines.append(
            f"{name},{cell.order},{_fmt(f.bfr_per_channel[0])},{_fmt(f.bfr_per_channel[1])},"
            f"{_fmt(f.bfr_mean)},{f.rmse_per_channel[0]!r},{f.rmse_per_channel[1]!r},"
            f"{cell.n_train},{f.n_samples},{cell.model.spectral_radius()!r}"
        )
    return "\n".join(lines) + "\n"


def _cell_name(key) -> str:
    *labels, order = key
    return "_".join(str(x) for x in labels) + f"_o{order}"


# -- commands -----------------------------------------------------------------


def _rls_config(args) -> RlsConfig:
    return RlsConfig(forgetting=args.lam, p0_scale=args.p0, trace_stride=args.stride)


def _load_inputs(args):
    series = dataio.parse_ltgp_csv(Path(args.ltgp).read_bytes())
    catalog = dataio.parse_catalog_csv(Path(args.catalog).read_bytes())
    inputs = dataio.build_input_series(catalog, len(series))
    return series, catalog, inputs


def cmd_synth(args, out: OutputDir) -> dict:
    spec = dataio.parse_synth_spec(Path(args.spec).read_text())
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    catalog = None
    if args.catalog:
        catalog = dataio.parse_catalog_csv(Path(args.catalog).read_bytes())
    series, catalog = dataio.generate_synthetic(spec, catalog)
    out.write("ltgp.csv", dataio.write_ltgp_csv(series))
    out.write("catalog.csv", dataio.write_catalog_csv(catalog))
    out.write("truth.txt", render_model(spec.true_model))
    out.write("spec.txt", dataio.write_synth_spec(spec))
    return {"spec": dataio.write_synth_spec(spec), "driving_catalog": args.catalog}


def cmd_identify(args, out: OutputDir) -> dict:
    series, _, inputs = _load_inputs(args)
    data = series.with_input(inputs)
    if args.train_len is not None:
        n_train = args.train_len
    else:
        n_train = train_length(len(data), args.train_fraction)
    train, valid = split_dataset(data, n_train)
    rls = _rls_config(args)
    model, traces = identify(train, args.order, rls)
    fit = evaluate(model, valid, args.mode)
    write_fit_artifacts(out, "", model, traces, fit, valid, args.mode, args.svg)
    return {"order": args.order, "rls": rls, "mode": args.mode, "n_train": n_train, "seed": args.seed}


def cmd_scenario(args, out: OutputDir) -> dict:
    series, catalog, inputs = _load_inputs(args)
    areas = parse_areas(Path(args.areas).read_text()) if args.areas else default_areas()
    rls = _rls_config(args)
    orders = (args.order,) if args.order else (2, 4)
    if args.which == 1:
        report = run_scenario1(
            series, inputs, catalog, areas, orders,
            train_len=args.train_len if args.train_len is not None else 30000,
            rls=rls, mode=args.mode,
        )
    else:
        cfg = WindowConfig(args.window_hours, args.overlap)
        report = run_scenario2(
            series, inputs, catalog, areas, cfg, orders,
            train_fraction=args.train_fraction, rls=rls, mode=args.mode,
        )
    out.write("summary.csv", render_summary(report, orders))
    out.write("cells.csv", render_cells(report))
    for key, cell in report.cells.items():
        if cell is not None:
            write_fit_artifacts(
                out, f"cells/{_cell_name(key)}/", cell.model, cell.traces, cell.fit,
                cell.validation, args.mode, args.svg,
            )
    missing = report.missing()
    if missing:
        raise MissingCells("no events for " + ";".join(_cell_name(k) for k in missing))
    meta = {k: v for k, v in report.metadata.items() if k != "rls"}
    return {"scenario": args.which, "orders": orders, "rls": rls, "seed": args.seed, **meta}


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("train fraction must lie in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--svg", action="store_true", help="also write SVG plots")
    common.add_argument("--seed", type=int, default=None, help=f"random seed; for synth it overrides the spec file's seed (default {DEFAULT_SEED})")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--lambda", dest="lam", type=float, default=1.0, help="forgetting factor")
    fitting.add_argument("--p0", type=float, default=1e6, help="initial covariance scale")
    fitting.add_argument("--stride", type=int, default=10, help="trace snapshot stride")
    fitting.add_argument("--mode", choices=MODES, default="one-step")
    fitting.add_argument("--train-len", type=int, default=None)
    fitting.add_argument("--train-fraction", type=_fraction, default=Fraction(2, 3))

    parser = argparse.ArgumentParser(
        prog="ltgp-sysid", description="RLS identification of LTI models from LTGP signals."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("spec", help="synthetic spec file (key = value)")
    p.add_argument("--catalog", help="drive the model with this catalog instead of random events")

    p = sub.add_parser("identify", parents=[common, fitting], help="fit and score one model")
    p.add_argument("ltgp", help="ltgp.csv path")
    p.add_argument("catalog", help="catalog.csv path")
    p.add_argument("--order", type=int, choices=(2, 4), default=2)

    p = sub.add_parser("scenario", parents=[common, fitting], help="run scenario 1 or 2")
    p.add_argument("which", type=int, choices=(1, 2))
    p.add_argument("ltgp", help="ltgp.csv path")
    p.add_argument("catalog", help="catalog.csv path")
    p.add_argument("--order", type=int, choices=(2, 4), default=None, help="default: both")
    p.add_argument("--areas", help="area config file (name lon_min lon_max lat_min lat_max)")
    p.add_argument("--window-hours", type=int, default=168)
    p.add_argument("--overlap", choices=OVERLAP_POLICIES, default="concatenate")
    return parser


_COMMANDS = {"synth": cmd_synth, "identify": cmd_identify, "scenario": cmd_scenario}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    started = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    inputs = [p for p in (getattr(args, "spec", None), getattr(args, "ltgp", None),
                          getattr(args, "catalog", None)) if p]
    try:
        out = OutputDir(args.out)
        try:
            config, status = _COMMANDS[args.command](args, out), 0
        except MissingCells as exc:
            config, status = {"missing": str(exc)}, 3
            print(f"error: MissingCells: {exc}", file=sys.stderr)
        out.write_manifest(["ltgp-sysid", *argv], inputs, config, started, time.perf_counter() - t0)
    except (LtgpError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    sys.exit(main())
