"""Two-species parameters and the deterministic quasispecies flow.

With ``x`` the frequency of the low-fitness type 1 the quasispecies ODE is

    dx/dt = -s x (1 - x) + m0 f0 (1 - x) - m1 f1 x,

with selection rate ``s = f0 - f1 > 0`` and effective mutation parameters
``m_i = lambda_i * gamma_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fitness import FitnessModel
from .simplex import MutationChannel


@dataclass(frozen=True)
class TwoSpeciesParams:
    """Constant fitness ``f0 > f1``, channel 0->1 ``(lambda0, gamma0)`` and 1->0 ``(lambda1, gamma1)``."""

    f0: float
    f1: float
    lambda0: float = 0.0
    gamma0: float = 1.0
    lambda1: float = 0.0
    gamma1: float = 1.0

    def __post_init__(self):
        if self.f0 < 0 or self.f1 < 0:
            raise ValueError("fitness values must be nonnegative")
        if not self.f0 > self.f1:
            raise ValueError(f"selection rate s = f0 - f1 must be positive (f0={self.f0}, f1={self.f1})")
        for name in ("lambda0", "lambda1"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("gamma0", "gamma1"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")

    @classmethod
    def from_mutation(cls, f0, f1, m0=0.0, gamma0=1.0, m1=0.0, gamma1=1.0) -> TwoSpeciesParams:
        """Parametrize by effective mutation ``m_i`` and fraction ``gamma_i`` (``lambda_i = m_i / gamma_i``)."""
        return cls(f0, f1, m0 / gamma0, gamma0, m1 / gamma1, gamma1)

    @property
    def s(self) -> float:
        return self.f0 - self.f1

    @property
    def m0(self) -> float:
        return self.lambda0 * self.gamma0

    @property
    def m1(self) -> float:
        return self.lambda1 * self.gamma1

    @property
    def mf0(self) -> float:
        return self.m0 * self.f0

    @property
    def mf1(self) -> float:
        return self.m1 * self.f1

    def with_gamma0(self, gamma: float) -> TwoSpeciesParams:
        """Same ``m0``, new fraction: moves along the curve ``lambda0 = m0 / gamma``."""
        return replace(self, lambda0=self.m0 / gamma, gamma0=gamma)

    def model(self) -> FitnessModel:
        return FitnessModel.from_constant([self.f0, self.f1])

    def channels(self) -> list[MutationChannel]:
        out = []
        if self.lambda0 > 0:
            out.append(MutationChannel(0, 1, self.lambda0, self.gamma0))
        if self.lambda1 > 0:
            out.append(MutationChannel(1, 0, self.lambda1, self.gamma1))
        return out


def quasispecies_rhs(p: TwoSpeciesParams, x):
    return -p.s * x * (1 - x) + p.mf0 * (1 - x) - p.mf1 * x


def equilibrium_xbar(p: TwoSpeciesParams) -> float:
    """Smallest root in [0, 1] of ``s x (1 - x) - m0 f0 (1 - x) + m1 f1 x``.

    The polynomial is ``-a`` at 0 and ``b`` at 1 (``a = m0 f0``, ``b = m1 f1``);
    the smaller root is the attracting rest point.  Written in the
    cancellation-free form ``2a / (B + sqrt(B^2 - 4 s a))``.
    """
    a, b, s = p.mf0, p.mf1, p.s
    big = s + a + b
    disc = max(big * big - 4.0 * s * a, 0.0)
    return min(2.0 * a / (big + math.sqrt(disc)), 1.0)


def quasispecies_flow_rk4(p: TwoSpeciesParams, x, t: float, step: float = 1e-3):
    """RK4 integration of the quasispecies ODE (vectorized over ``x``)."""
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise ValueError("t must be >= 0")
    n = max(1, math.ceil(t / step - 1e-12)) if t > 0 else 0
    h = t / n if n else 0.0
    y = x.copy()
    for _ in range(n):
        k1 = quasispecies_rhs(p, y)
        k2 = quasispecies_rhs(p, y + 0.5 * h * k1)
        k3 = quasispecies_rhs(p, y + 0.5 * h * k2)
        k4 = quasispecies_rhs(p, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def quasispecies_closed_form(p: TwoSpeciesParams, x, t: float):
    """Explicit solution when one mutation direction is switched off, else ``None``."""
    x = np.asarray(x, dtype=float)
    s, a, b = p.s, p.mf0, p.mf1
    if b == 0:
        if a < s:
            xbar = a / s
            return xbar + (x - xbar) / (1 + (1 - x) / (1 - xbar) * math.expm1(s * (1 - xbar) * t))
        if a == s:
            return 1 - (1 - x) / (1 + s * (1 - x) * t)
        # w = 1 - x solves dw/dt = -w (k + s w) with k = a - s > 0
        k = a - s
        w = 1 - x
        return 1 - w / (1 + math.expm1(k * t) * (1 + s * w / k))
    if a == 0:
        rate = s + b
        return x * math.exp(-rate * t) / (1 - s * x / rate * -math.expm1(-rate * t))
    return None


def strong_case_display(p: TwoSpeciesParams, x, t: float):
    """``1 - (1 - x) / (1 + s (1 - x) / k (e^{k t} - 1))`` with ``k = m0 f0 - s > 0``.

    A commonly quoted form for the strong unfair case.  It does not solve the
    quasispecies ODE (its slope at ``t = 0``, ``x = 0`` is ``s`` instead of
    ``m0 f0``) but it never exceeds the exact solution, so it remains a valid,
    looser lower bound for ``u``.
    """
    if not (p.mf1 == 0 and p.mf0 > p.s):
        raise ValueError("needs m1 = 0 and m0 f0 > s")
    x = np.asarray(x, dtype=float)
    k = p.mf0 - p.s
    return 1 - (1 - x) / (1 + p.s * (1 - x) / k * math.expm1(k * t))


def quasispecies_flow(p: TwoSpeciesParams, x, t: float, step: float = 1e-3):
    """``X(x, t)``: closed form where one exists, RK4 otherwise."""
    if t < 0:
        raise ValueError("t must be >= 0")
    exact = quasispecies_closed_form(p, x, t)
    if exact is not None:
        return exact
    return quasispecies_flow_rk4(p, x, t, step)
