"""Deterministic skeleton: the drift ``a(x)`` and its characteristic flow ``Y(x, t)``.

The drift is the *negated* replicator field, ``a_k(x) = -(f_k(x) - fbar(x)) x_k``,
so ``Y(x, -t)`` is the replicator trajectory started at ``x`` and observed
at time ``t``.  Everything here works in reduced coordinates ``x_1..x_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fitness import FitnessModel
from .simplex import ReducedState, lift_array


class FlowError(RuntimeError):
    """The integrated state left the reduced simplex by more than the tolerance."""


@dataclass(frozen=True)
class FlowConfig:
    integrator: str = "rk4"
    step: float = 1e-2
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.integrator not in ("rk4", "closed_form_2species"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def step_for(self, m: FitnessModel) -> float:
        norm = m.sup_norm()
        return self.step if norm == 0 else min(self.step, 0.01 / norm)


def drift_array(m: FitnessModel, r: np.ndarray) -> np.ndarray:
    x = lift_array(r)
    f = m.evaluate(x)
    fbar = np.sum(x * f, axis=-1, keepdims=True)
    return (-(f - fbar) * x)[..., 1:]


def drift_a(m: FitnessModel, r: ReducedState) -> np.ndarray:
    if r.d != m.d:
        raise ValueError(f"state dimension {r.d} does not match model dimension {m.d}")
    return drift_array(m, r.coords)


def _confine(y: np.ndarray, tol: float) -> np.ndarray:
    low = -np.min(y, axis=-1)
    high = np.sum(y, axis=-1) - 1.0
    excursion = np.maximum(low, high)
    if np.any(excursion > tol):
        raise FlowError(
            f"state left the reduced simplex by {float(np.max(excursion)):.3e} "
            f"(tolerance {tol:.1e}); reduce the integration step"
        )
    if np.any(excursion > 0):
        y = np.maximum(y, 0.0)
        total = y.sum(axis=-1, keepdims=True)
        y = np.where(total > 1.0, y / np.maximum(total, 1.0), y)
    return y


def _rk4(m: FitnessModel, y: np.ndarray, h: np.ndarray, sign: np.ndarray) -> np.ndarray:
    h = h[:, None]
    sign = sign[:, None]
    k1 = sign * drift_array(m, y)
    k2 = sign * drift_array(m, y + 0.5 * h * k1)
    k3 = sign * drift_array(m, y + 0.5 * h * k2)
    k4 = sign * drift_array(m, y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _closed_form(m: FitnessModel, y: np.ndarray, t: np.ndarray) -> np.ndarray:
    # d = 1, constant fitness: a(x) = s x (1 - x) with s = f0 - f1.
    s = float(m.constant[0] - m.constant[1])
    x = y[:, 0]
    with np.errstate(over="ignore"):
        decay = np.exp(-s * t)
        out = np.where(x > 0, x / (x + (1.0 - x) * decay), 0.0)
    return out[:, None]


def flow_array(m: FitnessModel, r: np.ndarray, t, cfg: FlowConfig | None = None) -> np.ndarray:
    """Vectorized ``Y(r, t)`` for points of shape ``(n, d)`` and scalar or per-point times.

    Negative times integrate the replicator field forward; each point gets
    its own uniform step no larger than ``cfg.step_for(m)``.
    """
    cfg = cfg or FlowConfig()
    r = np.atleast_2d(np.asarray(r, dtype=float))
    n = r.shape[0]
    t = np.broadcast_to(np.asarray(t, dtype=float), (n,))
    if cfg.integrator == "closed_form_2species":
        if m.d != 1 or not m.is_constant:
            raise ValueError("closed_form_2species needs d = 1 and constant fitness")
        return _confine(_closed_form(m, r, t), cfg.tolerance)

    h_max = cfg.step_for(m)
    duration = np.abs(t)
    sign = np.sign(t)
    steps = np.ceil(duration / h_max - 1e-12).astype(np.int64)
    steps = np.maximum(steps, (duration > 0).astype(np.int64))
    h = np.divide(duration, steps, out=np.zeros(n), where=steps > 0)
    y = r.copy()
    order = np.argsort(-steps, kind="stable")
    sorted_steps = steps[order]
    for k in range(int(sorted_steps[0]) if n else 0):
        # points still integrating form a prefix of `order`
        n_active = int(np.searchsorted(-sorted_steps, -k, side="left"))
        idx = order[:n_active]
        y[idx] = _confine(_rk4(m, y[idx], h[idx], sign[idx]), cfg.tolerance)
    return y


def characteristic_flow(m: FitnessModel, r: ReducedState, t: float, cfg: FlowConfig | None = None) -> ReducedState:
    """``Y(r, t)``: the point reached after time ``t`` along ``dy/dt = a(y)``."""
    if r.d != m.d:
        raise ValueError(f"state dimension {r.d} does not match model dimension {m.d}")
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    return ReducedState(flow_array(m, r.coords[None, :], t, cfg)[0])


def replicator_trajectory(m: FitnessModel, r: ReducedState, times, cfg: FlowConfig | None = None) -> np.ndarray:
    """Reduced replicator states at each of ``times`` (rows), i.e. ``Y(r, -t)``."""
    times = np.asarray(times, dtype=float)
    pts = np.repeat(r.coords[None, :], times.size, axis=0)
    return flow_array(m, pts, -times, cfg)
