"""Two species with constant fitness: closed forms, thresholds and the gamma study.

Type 0 is the high-fitness species (``s = f0 - f1 > 0``) and ``x`` is the
frequency of type 1.  In the unfair-but-weak regime (no 1->0 mutation,
``0 < m0 f0 < s``) the effective mutation ``m = m0`` is held fixed while the
jump fraction ``gamma`` varies along ``lambda = m / gamma``.  Small gamma
means frequent small jumps and recovers the quasispecies solution ``X``;
``gamma = 1`` concentrates mutation in rare whole-population events and
gives the closed form ``Z``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .kolmogorov import Marcher, SolverConfig, identity_datum, solve
from .mesh import Mesh
from .quasispecies import (
    TwoSpeciesParams,
    equilibrium_xbar,
    quasispecies_flow,
    strong_case_display,
)

__all__ = [
    "TwoSpeciesParams",
    "equilibrium_xbar",
    "gamma_star",
    "solution_X",
    "solution_Z",
    "solution_replicator",
    "strong_case_display",
    "bounds",
    "Candidate",
    "z_candidate",
    "x_candidate",
    "constant_candidate",
    "residual_Kgamma1",
    "PlateauError",
    "Plateau",
    "find_plateau",
    "ubar_gamma",
    "SweepRow",
    "sweep_gamma",
]


def _threshold_fn(s, mf):
    return lambda g: s * g + mf * math.log1p(-g)


def gamma_star(s: float, mf: float) -> float:
    """Root in (0, 1) of ``s g + mf log(1 - g)``, by bisection to machine precision."""
    if not (s > mf > 0):
        raise ValueError(f"gamma_star needs s > mf > 0 (got s={s}, mf={mf})")
    g = _threshold_fn(s, mf)
    lo, hi = 0.5 * (1 - mf / s), math.nextafter(1.0, 0.0)
    # g > 0 on (0, gamma*): shrink lo toward 0 until the sign is right
    while g(lo) <= 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ValueError("could not bracket gamma_star from below")
    if g(hi) >= 0:
        raise ValueError(f"gamma_star is within one ulp of 1 for s/mf = {s / mf:g}")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def solution_X(p: TwoSpeciesParams, x, t: float):
    """Quasispecies flow ``X(x, t)`` (closed form when one direction of mutation is off)."""
    return quasispecies_flow(p, x, t)


def _require_unfair(p: TwoSpeciesParams, what: str):
    if p.m1 != 0:
        raise ValueError(f"{what} needs no 1->0 mutation (m1 = 0), got m1={p.m1}")


def solution_Z(p: TwoSpeciesParams, x, t: float):
    """Expected frequency when every mutation converts the whole type-0 population."""
    _require_unfair(p, "solution_Z")
    return z_candidate(p).value(np.asarray(x, dtype=float), t)


def solution_replicator(p: TwoSpeciesParams, x, t: float):
    """Pure selection, no mutation: ``x e^{-s t} / (1 - x (1 - e^{-s t}))``."""
    x = np.asarray(x, dtype=float)
    decay = math.exp(-p.s * t)
    return x * decay / (1.0 - x * -math.expm1(-p.s * t))


def bounds(p: TwoSpeciesParams, x, t: float):
    """``(lower, upper)`` enclosing ``u(x, t)`` when one mutation direction is off.

    The lower bound is always the quasispecies solution.  The upper bound is
    the replicator solution with no forward mutation (``m0 = 0``) and 1
    otherwise.
    """
    if p.m0 > 0 and p.m1 > 0:
        raise ValueError("bounds need m0 = 0 or m1 = 0")
    lower = np.asarray(solution_X(p, x, t), dtype=float)
    upper = solution_replicator(p, x, t) if p.m0 == 0 else np.ones_like(lower)
    return lower, upper


class Candidate(NamedTuple):
    """A function of ``(x, t)`` with its analytic partial derivatives."""

    value: Callable
    d_t: Callable
    d_x: Callable


def z_candidate(p: TwoSpeciesParams) -> Candidate:
    s, mf = p.s, p.mf0

    def parts(x, t):
        w = 1.0 - x
        A = np.exp((s - mf) * t)
        B = np.exp(s * t)
        D = 1.0 + w * (B - 1.0)
        return w, A, B, D

    def value(x, t):
        w, A, _, D = parts(x, t)
        return 1.0 - w * A / D

    def d_t(x, t):
        w, A, B, D = parts(x, t)
        return -w * A * ((s - mf) * D - w * s * B) / D**2

    def d_x(x, t):
        _, A, _, D = parts(x, t)
        return A / D**2

    return Candidate(value, d_t, d_x)


def x_candidate(p: TwoSpeciesParams) -> Candidate:
    """Quasispecies solution for ``m1 = 0``, ``m0 f0 < s``."""
    _require_unfair(p, "x_candidate")
    s, a = p.s, p.mf0
    if not a < s:
        raise ValueError("x_candidate needs m0 f0 < s")
    c, k = a / s, s - a

    def parts(x, t):
        E = np.exp(k * t)
        D = 1.0 + s * (1.0 - x) / k * (E - 1.0)
        return E, D

    def value(x, t):
        _, D = parts(x, t)
        return c + (x - c) / D

    def d_t(x, t):
        E, D = parts(x, t)
        return -(x - c) * s * (1.0 - x) * E / D**2

    def d_x(x, t):
        E, D = parts(x, t)
        return 1.0 / D + (x - c) * s * (E - 1.0) / (k * D**2)

    return Candidate(value, d_t, d_x)


def constant_candidate(c: float) -> Candidate:
    return Candidate(
        lambda x, t: np.full(np.broadcast(x, t).shape, float(c)),
        lambda x, t: np.zeros(np.broadcast(x, t).shape),
        lambda x, t: np.zeros(np.broadcast(x, t).shape),
    )


def residual_Kgamma1(p: TwoSpeciesParams, cand: Candidate, xs=None, ts=None) -> float:
    """Max over an ``(x, t)`` grid of ``|d_t u + s x (1 - x) d_x u - mf (u(1, t) - u(x, t))|``."""
    _require_unfair(p, "residual_Kgamma1")
    xs = np.linspace(0.0, 1.0, 101) if xs is None else np.asarray(xs, dtype=float)
    ts = np.linspace(0.0, 5.0, 51) if ts is None else np.asarray(ts, dtype=float)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    u = cand.value(X, T)
    res = cand.d_t(X, T) + p.s * X * (1 - X) * cand.d_x(X, T) - p.mf0 * (cand.value(np.ones_like(X), T) - u)
    return float(np.abs(res).max())


class PlateauError(RuntimeError):
    def __init__(self, message, oscillation, drift):
        super().__init__(message)
        self.oscillation = oscillation
        self.drift = drift


@dataclass
class Plateau:
    gamma: float
    value: float
    time: float
    oscillation: float  # spread of u over the window at `time`
    drift: float  # max |u(., time) - u(., time - 1)| over the window
    near_gamma_star: bool


def _require_weak(p: TwoSpeciesParams):
    _require_unfair(p, "the gamma study")
    if not 0 < p.mf0 < p.s:
        raise ValueError(f"the gamma study needs 0 < m0 f0 < s (m0 f0={p.mf0}, s={p.s})")


def find_plateau(
    p: TwoSpeciesParams,
    gamma: float,
    horizon: float = 600.0,
    tol: float = 1e-4,
    mesh: Mesh | None = None,
    dt: float | None = None,
    window: float = 0.9,
) -> Plateau:
    """March ``u_gamma`` until it is flat on ``[0, window]`` and stationary over one time unit.

    ``x = 1`` is excluded: ``u(1, t) = 1`` for all ``t`` while the interior
    limit may be lower.  The default mesh is graded toward ``x = 1`` so the
    boundary layer there stays resolved over long horizons.
    """
    _require_weak(p)
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    g_star = gamma_star(p.s, p.mf0)
    near = abs(gamma - g_star) < 1e-3
    if near:
        warnings.warn(
            f"gamma={gamma:g} is close to the threshold {g_star:.6f}; a constant limit is not guaranteed there",
            stacklevel=2,
        )
    q = p.with_gamma0(gamma)
    mesh = mesh or Mesh.graded_interval()
    if dt is None:
        dt = min(0.01, 0.1 / (q.lambda0 * q.f0))
    marcher = Marcher(mesh, q.model(), q.channels(), dt)
    inside = mesh.x <= window
    u = identity_datum(mesh, 1)
    osc = drift = math.inf
    for k in range(1, int(math.ceil(horizon)) + 1):
        prev = u
        u = marcher.advance(u, 1.0)
        osc = float(np.ptp(u[inside]))
        drift = float(np.abs(u - prev)[inside].max())
        if osc < tol and drift < tol:
            return Plateau(gamma, float(u[inside].mean()), float(k), osc, drift, near)
    raise PlateauError(
        f"no plateau for gamma={gamma:g} within t={horizon:g}: oscillation {osc:.3e}, drift {drift:.3e}",
        osc,
        drift,
    )


def ubar_gamma(p: TwoSpeciesParams, gamma: float, horizon: float = 600.0, tol: float = 1e-4, **kwargs) -> float:
    """Large-time interior value of the expected type-1 frequency at fraction ``gamma``."""
    return find_plateau(p, gamma, horizon, tol, **kwargs).value


@dataclass
class SweepRow:
    gamma: float
    x_probe: float
    t_probe: float
    u_gamma: float
    z_ref: float
    x_ref: float


def sweep_gamma(
    p: TwoSpeciesParams,
    gammas,
    x_probe: float,
    t_probe: float,
    cfg: SolverConfig | None = None,
    mesh: Mesh | None = None,
    threads: int = 1,
) -> list[SweepRow]:
    """``u_gamma(x_probe, t_probe)`` for each gamma, next to the ``Z`` and ``X`` references.

    Each gamma is an independent solve; ``threads > 1`` runs them concurrently.
    """
    _require_unfair(p, "sweep_gamma")
    gammas = [float(g) for g in gammas]
    if not gammas or any(not 0 < g <= 1 for g in gammas) or gammas != sorted(gammas):
        raise ValueError("gammas must be sorted ascending within (0, 1]")
    cfg = cfg or SolverConfig()
    z_ref = float(solution_Z(p, x_probe, t_probe))
    x_ref = float(solution_X(p, x_probe, t_probe))

    def one(g):
        q = p.with_gamma0(g)
        u = solve(q.model(), q.channels(), cfg, mesh=mesh, times=[t_probe])[0]
        return SweepRow(g, x_probe, t_probe, float(u([x_probe])[0]), z_ref, x_ref)

    if threads > 1 and len(gammas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, gammas))
    return [one(g) for g in gammas]
