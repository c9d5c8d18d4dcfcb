"""Fitness landscapes: constant per-type fitness or linear game fitness ``f(x) = A x``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .simplex import MutationChannel, SimplexState


@dataclass(frozen=True, eq=False)
class FitnessModel:
    """Exactly one of ``constant`` (shape ``(d+1,)``) or ``payoff`` (shape ``(d+1, d+1)``).

    Entries must be nonnegative so that every ``f_k`` is nonnegative on the
    simplex.  Prefer the :meth:`from_constant` / :meth:`from_payoff`
    constructors.
    """

    constant: Optional[np.ndarray] = None
    payoff: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.constant is None) == (self.payoff is None):
            raise ValueError("give exactly one of constant or payoff")
        if self.constant is not None:
            arr = np.array(self.constant, dtype=float)
            if arr.ndim != 1 or arr.size < 2:
                raise ValueError(f"constant fitness must be a vector of length >= 2, got shape {arr.shape}")
            field = "constant"
        else:
            arr = np.array(self.payoff, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
                raise ValueError(f"payoff must be a square matrix of size >= 2, got shape {arr.shape}")
            field = "payoff"
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"{field} entries must be finite and nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, field, arr)

    @classmethod
    def from_constant(cls, f) -> FitnessModel:
        return cls(constant=f)

    @classmethod
    def from_payoff(cls, A) -> FitnessModel:
        return cls(payoff=A)

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    @property
    def d(self) -> int:
        arr = self.constant if self.is_constant else self.payoff
        return arr.shape[0] - 1

    def type_bounds(self) -> np.ndarray:
        """Per-type ``sup_{x in S} f_k(x)``; for ``A x`` the row maximum, reached at a vertex."""
        if self.is_constant:
            return self.constant.copy()
        return self.payoff.max(axis=1)

    def sup_norm(self) -> float:
        return float(self.type_bounds().max())

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Fitness for full frequency vectors stacked along the last axis."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d + 1:
            raise ValueError(f"state has {x.shape[-1]} types, model has {self.d + 1}")
        if self.is_constant:
            return np.broadcast_to(self.constant, x.shape)
        # elementwise product keeps results independent of batch size (no BLAS)
        return np.sum(x[..., None, :] * self.payoff, axis=-1)


def fitness_at(m: FitnessModel, s: SimplexState) -> np.ndarray:
    return np.array(m.evaluate(s.freqs))


def mean_fitness(m: FitnessModel, s: SimplexState) -> float:
    return float(s.freqs @ m.evaluate(s.freqs))


def intensity_bound(m: FitnessModel, channels: Iterable[MutationChannel]) -> float:
    """Upper bound for the total mutation intensity ``sum_c rate_c f_{ancestor}(x)`` over the simplex.

    Exact for constant fitness.  For game fitness each row maximum is
    attained at a vertex, so the bound is sharp whenever all channels share
    one ancestor.
    """
    bounds = m.type_bounds()
    total = 0.0
    for c in channels:
        if c.ancestor > m.d or c.descendant > m.d:
            raise ValueError(f"channel {c.ancestor}->{c.descendant} out of range for d={m.d}")
        total += c.rate * bounds[c.ancestor]
    return float(total)


def channel_intensities(m: FitnessModel, channels, x: np.ndarray) -> np.ndarray:
    """Per-channel intensities ``rate * f_ancestor(x)``; shape ``x.shape[:-1] + (n_channels,)``."""
    f = m.evaluate(x)
    if not channels:
        return np.zeros(np.shape(x)[:-1] + (0,))
    anc = np.array([c.ancestor for c in channels])
    rates = np.array([c.rate for c in channels])
    return f[..., anc] * rates
