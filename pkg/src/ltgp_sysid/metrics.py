"""Best Fit Rate and the per-channel fit report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominatorError, ShapeError
from .ident import IdentDataset
from .model import LtiModel, StateTrajectory, predict_one_step, simulate_free_run, state_embed

MODES = ("one-step", "free-run")


def bfr(actual, predicted) -> float:
    """Best Fit Rate in percent: ``100 * max(0, 1 - |y - yhat| / |y - mean(y)|)``."""
    y = np.asarray(actual, dtype=float).reshape(-1)
    yhat = np.asarray(predicted, dtype=float).reshape(-1)
    if y.size != yhat.size:
        raise ShapeError(f"length mismatch: {y.size} vs {yhat.size}")
    if y.size < 2:
        raise ShapeError("BFR needs at least 2 samples")
    denom = np.linalg.norm(y - y.mean())
    if denom == 0.0:
        raise DegenerateDenominatorError("actual sequence is constant")
    with np.errstate(over="ignore", invalid="ignore"):
        num = np.linalg.norm(y - yhat)
    if not np.isfinite(num):
        return 0.0
    return float(100.0 * max(0.0, 1.0 - num / denom))


def rmse(actual, predicted) -> float:
    y = np.asarray(actual, dtype=float).reshape(-1)
    yhat = np.asarray(predicted, dtype=float).reshape(-1)
    if y.size != yhat.size:
        raise ShapeError(f"length mismatch: {y.size} vs {yhat.size}")
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sqrt(np.mean((y - yhat) ** 2)))


@dataclass(frozen=True)
class FitReport:
    bfr_per_channel: tuple[float, float]
    rmse_per_channel: tuple[float, float]
    n_samples: int
    mode: str

    @property
    def bfr_mean(self) -> float:
        return 0.5 * (self.bfr_per_channel[0] + self.bfr_per_channel[1])


def simulate(model: LtiModel, data: IdentDataset, mode: str = "one-step"):
    """Measured and predicted channel trajectories used for scoring.

    Both modes score the same samples: every embedded state after the first.
    Free run starts from the first measured state.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    states = state_embed(data.ch0, data.ch1, model.order)
    if len(states) < 3:
        raise ShapeError(f"need at least 3 embedded states to score, got {len(states)}")
    u = data.input[states.start_index : len(data) - 1]
    if mode == "one-step":
        pred = predict_one_step(model, states, u)
    else:
        run = simulate_free_run(model, states[0], u, states.start_index)
        pred = StateTrajectory(run.states[1:], run.start_index + 1)
    measured = StateTrajectory(states.states[1:], states.start_index + 1)
    return measured, pred


def evaluate(model: LtiModel, data: IdentDataset, mode: str = "one-step") -> FitReport:
    """Score ``model`` on ``data`` channel by channel (physical channels only)."""
    measured, pred = simulate(model, data, mode)
    y, yhat = measured.channels(), pred.channels()
    return FitReport(
        bfr_per_channel=(bfr(y[:, 0], yhat[:, 0]), bfr(y[:, 1], yhat[:, 1])),
        rmse_per_channel=(rmse(y[:, 0], yhat[:, 0]), rmse(y[:, 1], yhat[:, 1])),
        n_samples=len(measured),
        mode=mode,
    )
