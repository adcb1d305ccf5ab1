"""Recursive least squares identification of the free rows of an LtiModel.

Each estimable row of ``[A | B]`` gets its own estimator. Both rows share
the regressor

    order 2:  phi_k = [ch0_k, ch1_k, m_k]
    order 4:  phi_k = [ch0_k, ch0_{k-1}, ch1_k, ch1_{k-1}, m_k]

and are fitted against ch0_{k+1} and ch1_{k+1} respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, RankDeficiencyError, ShapeError
from .model import ORDERS, LtiModel, from_row_params, state_embed


@dataclass(frozen=True)
class RlsConfig:
    """RLS settings.

    Attributes:
        forgetting: Forgetting factor in (0, 1]; 1 keeps all history.
        p0_scale: Initial covariance is ``p0_scale * I``.
        theta0: Initial parameter vector shared by every row; zeros if None.
        trace_stride: Keep a parameter snapshot every this many updates.
    """

    forgetting: float = 1.0
    p0_scale: float = 1e6
    theta0: tuple[float, ...] | None = None
    trace_stride: int = 10

    def __post_init__(self):
        if not 0.0 < self.forgetting <= 1.0:
            raise ValueError(f"forgetting must be in (0, 1], got {self.forgetting}")
        if not self.p0_scale > 0.0 or not math.isfinite(self.p0_scale):
            raise ValueError(f"p0_scale must be positive and finite, got {self.p0_scale}")
        if self.trace_stride < 1:
            raise ValueError(f"trace_stride must be >= 1, got {self.trace_stride}")
        if self.theta0 is not None:
            object.__setattr__(self, "theta0", tuple(float(v) for v in self.theta0))


@dataclass(frozen=True)
class ConvergenceTrace:
    """Parameter snapshots and a priori squared errors of one RLS run.

    ``steps[i]`` is the number of updates absorbed when ``thetas[i]`` was taken.
    """

    steps: np.ndarray
    thetas: np.ndarray
    sq_errors: np.ndarray

    def __len__(self):
        return len(self.steps)


@dataclass
class RlsEstimator:
    """Single-output RLS estimator.

    Updated in place by :meth:`update`; one writer only.
    """

    theta: np.ndarray
    p: np.ndarray
    config: RlsConfig = field(default_factory=RlsConfig)
    samples_seen: int = 0
    _snap_steps: list = field(default_factory=list, repr=False)
    _snap_thetas: list = field(default_factory=list, repr=False)
    _sq_errors: list = field(default_factory=list, repr=False)

    @classmethod
    def start(cls, d: int, config: RlsConfig | None = None) -> "RlsEstimator":
        config = config or RlsConfig()
        if config.theta0 is None:
            theta = np.zeros(d)
        else:
            theta = np.array(config.theta0, dtype=float)
            if theta.shape != (d,):
                raise ShapeError(f"theta0 has length {theta.size}, expected {d}")
        return cls(theta=theta, p=config.p0_scale * np.eye(d), config=config)

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    def update(self, phi, y: float) -> "RlsEstimator":
        phi = np.asarray(phi, dtype=float).reshape(-1)
        if phi.shape != (self.d,):
            raise ShapeError(f"regressor of length {phi.size}, expected {self.d}")
        y = float(y)
        if not math.isfinite(y):
            raise NumericError(f"non-finite target {y}")
        lam = self.config.forgetting

        p_phi = self.p @ phi
        denom = lam + float(phi @ p_phi)
        err = y - float(phi @ self.theta)
        if not (math.isfinite(denom) and math.isfinite(err)) or denom <= 0.0:
            raise NumericError(
                f"RLS update {self.samples_seen + 1} produced denom={denom}, error={err}"
            )
        gain = p_phi / denom
        self.theta = self.theta + gain * err
        p = (self.p - np.outer(gain, p_phi)) / lam
        self.p = 0.5 * (p + p.T)

        self.samples_seen += 1
        self._sq_errors.append(err * err)
        if (self.samples_seen - 1) % self.config.trace_stride == 0:
            self._snap_steps.append(self.samples_seen)
            self._snap_thetas.append(self.theta.copy())
        return self

    def trace(self) -> ConvergenceTrace:
        thetas = np.array(self._snap_thetas).reshape(-1, self.d)
        return ConvergenceTrace(
            steps=np.array(self._snap_steps, dtype=int),
            thetas=thetas,
            sq_errors=np.array(self._sq_errors),
        )


def rls_update(est: RlsEstimator, phi, y: float) -> RlsEstimator:
    """Absorb one sample; returns the (same, updated) estimator."""
    return est.update(phi, y)


@dataclass(frozen=True, eq=False)
class IdentDataset:
    """Aligned hourly channels and magnitude input."""

    ch0: np.ndarray
    ch1: np.ndarray
    input: np.ndarray

    def __post_init__(self):
        arrs = [np.array(v, dtype=float).reshape(-1) for v in (self.ch0, self.ch1, self.input)]
        n = arrs[0].size
        if any(a.size != n for a in arrs):
            raise ShapeError(f"unequal lengths {[a.size for a in arrs]}")
        if n < 3:
            raise ShapeError(f"dataset needs at least 3 samples, got {n}")
        if not all(np.all(np.isfinite(a)) for a in arrs):
            raise NumericError("dataset contains non-finite values")
        for name, a in zip(("ch0", "ch1", "input"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return self.ch0.size

    def slice(self, start: int, stop: int | None = None) -> "IdentDataset":
        s = slice(start, stop)
        return IdentDataset(self.ch0[s], self.ch1[s], self.input[s])


def regressors(data: IdentDataset, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressor matrix ``(n, order + 1)`` and targets ``(n, 2)``."""
    states = state_embed(data.ch0, data.ch1, order)
    if len(states) < 2:
        raise ShapeError(f"dataset too short for order {order}")
    first = states.start_index
    phi = np.column_stack([states.states[:-1], data.input[first : len(data) - 1]])
    targets = states.channels()[1:]
    return phi, targets


def identify(
    data: IdentDataset, order: int, config: RlsConfig | None = None
) -> tuple[LtiModel, list[ConvergenceTrace]]:
    """Fit the free rows of an order-2 or order-4 model by RLS.

    Returns the model and one convergence trace per estimated row.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be 2 or 4, got {order}")
    config = config or RlsConfig()
    phi, targets = regressors(data, order)
    rows = [RlsEstimator.start(order + 1, config) for _ in range(2)]
    for k in range(phi.shape[0]):
        for j, est in enumerate(rows):
            est.update(phi[k], targets[k, j])
    model = from_row_params(order, [est.theta for est in rows])
    return model, [est.trace() for est in rows]


def batch_least_squares(data: IdentDataset, order: int, ridge: float = 0.0) -> LtiModel:
    """Ridge-regularized normal-equation fit on the same regressors as :func:`identify`."""
    if ridge < 0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")
    phi, targets = regressors(data, order)
    d = phi.shape[1]
    if ridge == 0.0:
        if phi.shape[0] < d or np.linalg.matrix_rank(phi) < d:
            raise RankDeficiencyError(f"regressor matrix {phi.shape} is rank deficient")
    gram = phi.T @ phi + ridge * np.eye(d)
    try:
        theta = np.linalg.solve(gram, phi.T @ targets)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(str(exc)) from exc
    return from_row_params(order, theta.T)
