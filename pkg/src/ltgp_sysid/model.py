"""Structured discrete-time LTI models x[k+1] = A x[k] + B m[k].

Two structures are supported:

* order 2, state ``[ch0_k, ch1_k]``, every entry of A and B free;
* order 4, state ``[ch0_k, ch0_{k-1}, ch1_k, ch1_{k-1}]``, rows 2 and 4 of A
  are fixed shift rows and the matching entries of B are zero.

Which entries are free is recorded in a boolean mask over the augmented
matrix ``[A | B]``. Identification writes only through that mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ShapeError

ORDERS = (2, 4)

# rows of [A | B] that carry free parameters, and the state index of each channel
_FREE_ROWS = {2: (0, 1), 4: (0, 2)}
CHANNEL_STATES = {2: (0, 1), 4: (0, 2)}

_SHIFT_ROWS_4 = {1: (1.0, 0.0, 0.0, 0.0), 3: (0.0, 0.0, 1.0, 0.0)}


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _structure_mask(order):
    mask = np.zeros((order, order + 1), dtype=bool)
    for r in _FREE_ROWS[order]:
        mask[r, :] = True
    return mask


@dataclass(frozen=True, eq=False)
class LtiModel:
    """Immutable order-2 or order-4 state-space model.

    Attributes:
        order: State dimension, 2 or 4.
        a: ``(order, order)`` state transition matrix.
        b: ``(order,)`` input gain vector.
        mask: ``(order, order + 1)`` boolean mask over ``[a | b]``; True marks
            an estimable entry.
    """

    order: int
    a: np.ndarray
    b: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if self.order not in ORDERS:
            raise InvalidParameterError(f"order must be 2 or 4, got {self.order}")
        a = _frozen(self.a)
        b = _frozen(self.b).reshape(-1)
        mask = _frozen(self.mask, dtype=bool)
        n = self.order
        if a.shape != (n, n) or b.shape != (n,) or mask.shape != (n, n + 1):
            raise ShapeError(
                f"inconsistent shapes for order {n}: a{a.shape} b{b.shape} mask{mask.shape}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidParameterError("model entries must be finite")
        if not np.array_equal(mask, _structure_mask(n)):
            raise InvalidParameterError(f"mask does not match the order-{n} structure")
        if n == 4:
            for r, row in _SHIFT_ROWS_4.items():
                if tuple(a[r]) != row or b[r] != 0.0:
                    raise InvalidParameterError(f"row {r + 1} must be the fixed shift row")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mask", mask)

    @property
    def augmented(self) -> np.ndarray:
        """``[a | b]`` as a fresh ``(order, order + 1)`` array."""
        return np.column_stack([self.a, self.b])

    def row_params(self) -> list[np.ndarray]:
        """Free parameters of each estimable row, in regressor order."""
        aug = self.augmented
        return [aug[r].copy() for r in _FREE_ROWS[self.order]]

    def param_names(self) -> list[str]:
        names = []
        for r in _FREE_ROWS[self.order]:
            names += [f"a{r + 1}{c + 1}" for c in range(self.order)]
            names.append(f"b{r + 1}")
        return names

    def params(self) -> dict[str, float]:
        """Free parameters keyed by name (``a11``, ..., ``b1``)."""
        values = np.concatenate(self.row_params())
        return dict(zip(self.param_names(), map(float, values)))

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.a))))


def _check_finite(values):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"parameters must be finite, got {list(arr)}")
    return arr


def make_second_order(a11, a12, a21, a22, b1, b2) -> LtiModel:
    p = _check_finite([a11, a12, a21, a22, b1, b2])
    return LtiModel(2, p[:4].reshape(2, 2), p[4:], _structure_mask(2))


def make_fourth_order(a11, a12, a13, a14, a31, a32, a33, a34, b1, b3) -> LtiModel:
    p = _check_finite([a11, a12, a13, a14, a31, a32, a33, a34, b1, b3])
    a = np.array(
        [
            p[0:4],
            _SHIFT_ROWS_4[1],
            p[4:8],
            _SHIFT_ROWS_4[3],
        ]
    )
    b = np.array([p[8], 0.0, p[9], 0.0])
    return LtiModel(4, a, b, _structure_mask(4))


def from_row_params(order: int, rows) -> LtiModel:
    """Build a model from per-row free parameters (as returned by ``row_params``).

    Only the masked entries are written; fixed structure comes from the order.
    """
    if order not in ORDERS:
        raise InvalidParameterError(f"order must be 2 or 4, got {order}")
    rows = [np.asarray(r, dtype=float).reshape(-1) for r in rows]
    if len(rows) != 2 or any(r.shape != (order + 1,) for r in rows):
        raise ShapeError(f"expected two rows of {order + 1} parameters")
    if order == 2:
        return make_second_order(*rows[0][:2], *rows[1][:2], rows[0][2], rows[1][2])
    return make_fourth_order(*rows[0][:4], *rows[1][:4], rows[0][4], rows[1][4])


def from_params(order: int, values) -> LtiModel:
    """Build a model from the flat free-parameter list (``params()`` order)."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if order not in ORDERS or values.size != 2 * (order + 1):
        raise InvalidParameterError(
            f"order {order} needs {2 * (order + 1) if order in ORDERS else '?'} parameters, "
            f"got {values.size}"
        )
    return from_row_params(order, values.reshape(2, order + 1))


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """Sequence of states, ``states[i]`` sits at sample ``start_index + i``."""

    states: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        states = _frozen(self.states)
        if states.ndim != 2 or states.shape[0] == 0:
            raise ShapeError(f"trajectory must be a non-empty 2-D array, got {states.shape}")
        # no finiteness check: free runs of unstable models are allowed to blow up
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, k):
        return self.states[k]

    @property
    def order(self) -> int:
        return self.states.shape[1]

    def channels(self) -> np.ndarray:
        """``(n, 2)`` array of the physical channels ch0, ch1."""
        return self.states[:, list(CHANNEL_STATES[self.order])]


def _as_state(model, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (model.order,):
        raise ShapeError(f"state of length {x.shape[0]} for an order-{model.order} model")
    return x


def step(model: LtiModel, x, m: float) -> np.ndarray:
    """One transition ``a @ x + b * m``."""
    x = _as_state(model, x)
    return model.a @ x + model.b * float(m)


def simulate_free_run(model: LtiModel, x0, inputs, start_index: int = 0) -> StateTrajectory:
    """Iterate the model from ``x0`` with no measurement feedback.

    Returns ``len(inputs) + 1`` states. No divergence checks are made.
    """
    x = _as_state(model, x0)
    u = np.asarray(inputs, dtype=float).reshape(-1)
    out = np.empty((u.size + 1, model.order))
    out[0] = x
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(u.size):
            out[k + 1] = step(model, out[k], u[k])
    return StateTrajectory(out, start_index)


def predict_one_step(model: LtiModel, states: StateTrajectory, inputs) -> StateTrajectory:
    """Predict each state from the measured state one sample earlier."""
    u = np.asarray(inputs, dtype=float).reshape(-1)
    if states.order != model.order:
        raise ShapeError(f"order-{states.order} states for an order-{model.order} model")
    if u.size != len(states) - 1:
        raise ShapeError(f"need {len(states) - 1} inputs for {len(states)} states, got {u.size}")
    if u.size == 0:
        raise ShapeError("one-step prediction needs at least two states")
    # same arithmetic as step() so self-generated data is predicted bit-exactly
    a, b = model.a, model.b
    pred = np.array([a @ x + b * m for x, m in zip(states.states[:-1], u.tolist())])
    return StateTrajectory(pred, states.start_index + 1)


def state_embed(ch0, ch1, order: int) -> StateTrajectory:
    """Stack the two channels into model states.

    Order 2 gives ``[ch0_k, ch1_k]`` from k = 0; order 4 gives
    ``[ch0_k, ch0_{k-1}, ch1_k, ch1_{k-1}]`` from k = 1.
    """
    c0 = np.asarray(ch0, dtype=float).reshape(-1)
    c1 = np.asarray(ch1, dtype=float).reshape(-1)
    if order not in ORDERS:
        raise InvalidParameterError(f"order must be 2 or 4, got {order}")
    if c0.size != c1.size:
        raise ShapeError(f"channel lengths differ: {c0.size} vs {c1.size}")
    lag = order // 2 - 1
    if c0.size < lag + 1:
        raise ShapeError(f"order {order} needs at least {lag + 1} samples, got {c0.size}")
    if order == 2:
        return StateTrajectory(np.column_stack([c0, c1]), 0)
    return StateTrajectory(np.column_stack([c0[1:], c0[:-1], c1[1:], c1[:-1]]), 1)
