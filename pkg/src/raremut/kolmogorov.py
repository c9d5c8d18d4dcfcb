"""Expected frequencies ``u_k(x, t)`` from the transport + nonlocal Kolmogorov equation.

    d_t u_k + a(x) . grad u_k = J u_k,    u_k(x, 0) = x_k,    x in the reduced simplex,

with ``J phi(x) = sum_c rate_c f_anc(x) [phi(jump_c(x)) - phi(x)]``.

The production path is a semi-Lagrangian scheme: trace the characteristic
back over one step, interpolate the old level at its foot and add the
nonlocal term evaluated there.  Because the drift is autonomous, one step
is a fixed sparse matrix; with ``dt * Lambda <= 1`` it is row-stochastic,
so the scheme is monotone and keeps ``u`` in ``[0, 1]``.

:func:`solve_picard` solves the same problem through fixed-point iteration
of the mild formulation along characteristics.  It shares no time stepping
with :func:`solve` and serves as an independent check on it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .fitness import FitnessModel, channel_intensities, intensity_bound
from .flow import FlowConfig, flow_array
from .mesh import GridFunction, Mesh
from .simplex import ReducedState, lift_array, reduced_jump_array

log = logging.getLogger(__name__)

# explicit coupling of the nonlocal term resolves the jump rate: dt <= RATE_CAP / Lambda
RATE_CAP = 0.1


class PicardError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    picard_tol: float = 1e-10
    picard_max_iter: int = 200
    interpolation: str = "linear"
    flow: FlowConfig = field(default_factory=FlowConfig)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")
        if self.interpolation != "linear":
            raise ValueError("only linear interpolation is supported")


def default_mesh(d: int) -> Mesh:
    if d == 1:
        return Mesh.uniform_interval(401)
    if d == 2:
        return Mesh.triangle(40)
    raise NotImplementedError(f"no mesh for d={d}; estimate u with simulate.monte_carlo_expectation")


def _check(m: FitnessModel, channels, mesh: Mesh):
    if mesh.d != m.d:
        raise ValueError(f"mesh has d={mesh.d}, model has d={m.d}")
    for c in channels:
        if max(c.ancestor, c.descendant) > m.d:
            raise ValueError(f"channel {c.ancestor}->{c.descendant} out of range for d={m.d}")


def _nonlocal_matrix(mesh: Mesh, m: FitnessModel, channels, points: np.ndarray, back=None) -> sparse.csr_matrix:
    """Matrix ``K`` with ``(K u)_p = J[interp u](points_p)``.

    ``back`` optionally maps jump targets before interpolation (used by the
    Picard solver, which follows each target back along its characteristic);
    the departure term then reads the nodal value itself.
    """
    n = len(points)
    if back is None:
        base = mesh.interpolation_matrix(points)
    else:
        base = sparse.identity(n, format="csr")
    K = sparse.csr_matrix((n, mesh.n_nodes))
    if not channels:
        return K
    rates = channel_intensities(m, channels, lift_array(points))
    for ci, c in enumerate(channels):
        target = reduced_jump_array(points, c.ancestor, c.descendant, c.fraction)
        if back is not None:
            target = back(target)
        K = K + sparse.diags(rates[:, ci]) @ (mesh.interpolation_matrix(target) - base)
    return K.tocsr()


def nonlocal_J(u: GridFunction, m: FitnessModel, channels, r: ReducedState) -> float:
    """``J u(r)`` with ``u`` interpolated linearly on its mesh."""
    channels = list(channels)
    _check(m, channels, u.mesh)
    return float((_nonlocal_matrix(u.mesh, m, channels, r.coords[None, :]) @ u.values)[0])


def step_operator(mesh: Mesh, m: FitnessModel, channels, dt: float, flow_cfg: FlowConfig | None = None) -> sparse.csr_matrix:
    """Sparse matrix of one semi-Lagrangian step of length ``dt``."""
    channels = list(channels)
    _check(m, channels, mesh)
    bound = intensity_bound(m, channels)
    if bound > 0 and dt > RATE_CAP / bound * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the cap {RATE_CAP}/Lambda = {RATE_CAP / bound:.4g}")
    feet = flow_array(m, mesh.nodes, -dt, flow_cfg)
    return (mesh.interpolation_matrix(feet) + dt * _nonlocal_matrix(mesh, m, channels, feet)).tocsr()


def step_semi_lagrangian(u: GridFunction, m: FitnessModel, channels, dt: float, flow_cfg: FlowConfig | None = None) -> GridFunction:
    """``u_{t+dt}(x) = I[u_t](Y(x, -dt)) + dt * J u_t(Y(x, -dt))`` at every node."""
    A = step_operator(u.mesh, m, channels, dt, flow_cfg)
    return GridFunction(u.mesh, u.component, A @ u.values, u.time + dt)


def identity_datum(mesh: Mesh, component: int) -> np.ndarray:
    if not 1 <= component <= mesh.d:
        raise ValueError(f"component must lie in 1..{mesh.d}")
    return mesh.nodes[:, component - 1].copy()


class Marcher:
    """Time marching with cached step operators, one per step length."""

    def __init__(self, mesh: Mesh, m: FitnessModel, channels, dt: float, flow_cfg: FlowConfig | None = None):
        self.mesh = mesh
        self.m = m
        self.channels = list(channels)
        _check(m, self.channels, mesh)
        bound = intensity_bound(m, self.channels)
        self.dt = min(dt, RATE_CAP / bound) if bound > 0 else dt
        if self.dt < dt:
            log.info("dt reduced from %g to %g to resolve the jump rate", dt, self.dt)
        self.flow_cfg = flow_cfg
        self._ops = {}

    def advance(self, values: np.ndarray, duration: float) -> np.ndarray:
        if duration <= 0:
            return values
        n = max(1, math.ceil(duration / self.dt - 1e-9))
        h = duration / n
        key = round(h, 15)
        if key not in self._ops:
            self._ops[key] = step_operator(self.mesh, self.m, self.channels, h, self.flow_cfg)
        A = self._ops[key]
        for _ in range(n):
            values = A @ values
        return values


def solve(
    m: FitnessModel,
    channels,
    cfg: SolverConfig | None = None,
    mesh: Mesh | None = None,
    times=None,
    component: int = 1,
    datum=None,
) -> list[GridFunction]:
    """March from the datum (default ``u(x, 0) = x_component``) and return snapshots at ``times``.

    ``times`` defaults to ``[cfg.t_end]``; ``0`` is allowed and echoes the
    datum.  No boundary condition is needed since characteristics never
    leave the reduced simplex.
    """
    cfg = cfg or SolverConfig()
    mesh = mesh or default_mesh(m.d)
    times = [cfg.t_end] if times is None else sorted(float(t) for t in times)
    if times and times[0] < 0:
        raise ValueError("times must be nonnegative")
    values = identity_datum(mesh, component) if datum is None else np.asarray(datum, dtype=float).copy()
    if values.shape != (mesh.n_nodes,):
        raise ValueError("datum must have one value per mesh node")
    marcher = Marcher(mesh, m, channels, cfg.dt, cfg.flow)
    out = []
    now = 0.0
    for t in times:
        values = marcher.advance(values, t - now)
        now = t
        out.append(GridFunction(mesh, component, values.copy(), t))
    return out


def solve_picard(
    m: FitnessModel,
    channels,
    T: float,
    cfg: SolverConfig | None = None,
    mesh: Mesh | None = None,
    component: int = 1,
    return_history: bool = False,
):
    """``u(., T)`` from fixed-point iteration of the mild problem along characteristics.

    With ``v(x, s) = u(Y(x, s - T), s)`` the mild form reads
    ``v(x, s) = Y_k(x, -T) + int_0^s I v(x, r) dr``, where ``I`` applies the
    jump kernel at ``Y(x, r - T)`` and maps each jump target back along its
    characteristic to time-``r`` coordinates.  Iterates are compared in sup
    norm over the whole ``(x, s)`` grid; the ``r`` integral uses the
    trapezoid rule on a grid of spacing ``<= cfg.dt``.
    """
    cfg = cfg or SolverConfig()
    mesh = mesh or default_mesh(m.d)
    channels = list(channels)
    _check(m, channels, mesh)
    if not T > 0:
        raise ValueError("T must be positive")
    n_r = max(1, math.ceil(T / cfg.dt - 1e-9))
    r_grid = np.linspace(0.0, T, n_r + 1)
    nodes = mesh.nodes
    v0 = flow_array(m, nodes, -T, cfg.flow)[:, component - 1]

    ops = []
    for r in r_grid:
        feet = flow_array(m, nodes, r - T, cfg.flow)
        lag = T - r
        ops.append(_nonlocal_matrix(mesh, m, channels, feet, back=lambda z, lag=lag: flow_array(m, z, lag, cfg.flow)))

    bound = intensity_bound(m, channels)
    horizon = 1.0 / (2.0 * bound) if bound > 0 else math.inf
    v = np.repeat(v0[None, :], r_grid.size, axis=0)
    gaps = []
    dr = T / n_r
    for _ in range(cfg.picard_max_iter):
        rate = np.stack([K @ row for K, row in zip(ops, v)])
        integral = np.zeros_like(v)
        integral[1:] = np.cumsum(0.5 * dr * (rate[1:] + rate[:-1]), axis=0)
        new = v0[None, :] + integral
        gap = float(np.abs(new - v).max())
        gaps.append(gap)
        v = new
        if gap < cfg.picard_tol or not np.isfinite(gap):
            break
    if not gaps[-1] < cfg.picard_tol:
        raise PicardError(
            f"Picard iteration did not reach tolerance {cfg.picard_tol:g} in {len(gaps)} iterations "
            f"(last gap {gaps[-1]:.3e}); T={T:g} vs contraction horizon 1/(2 Lambda) = {horizon:.4g}"
        )
    solution = GridFunction(mesh, component, v[-1].copy(), T)
    return (solution, gaps) if return_history else solution


def finite_difference_probe(u: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Central first and second differences at interior nodes of a 1-d mesh."""
    if u.mesh.d != 1:
        raise ValueError("finite_difference_probe needs a d = 1 mesh")
    x = u.mesh.x
    v = u.values
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    first = (v[2:] - v[:-2]) / (hm + hp)
    second = 2.0 * ((v[2:] - v[1:-1]) / hp - (v[1:-1] - v[:-2]) / hm) / (hm + hp)
    return first, second
