"""Frequency vectors on the simplex and the elementary mutation jump.

A population of ``d + 1`` types is described either by its full frequency
vector ``(x_0, ..., x_d)`` (a :class:`SimplexState`) or by the reduced
coordinates ``(x_1, ..., x_d)`` with ``x_0 = 1 - sum(x_k)`` implied (a
:class:`ReducedState`).  Type indices are zero-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-12


class SimplexError(ValueError):
    """A vector does not lie on the simplex (or the reduced simplex)."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SimplexState:
    """Frequencies ``x_0..x_d``: nonnegative, summing to one."""

    freqs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.freqs)
        if arr.ndim != 1 or arr.size < 2:
            raise SimplexError(f"need a 1-d vector with at least 2 entries, got shape {arr.shape}")
        if np.any(arr < -SIMPLEX_TOL) or np.any(arr > 1 + SIMPLEX_TOL):
            raise SimplexError(f"entries must lie in [0, 1]: {arr}")
        if abs(arr.sum() - 1.0) > SIMPLEX_TOL:
            raise SimplexError(f"entries must sum to 1 (sum={arr.sum()!r})")
        object.__setattr__(self, "freqs", arr)

    @classmethod
    def from_weights(cls, weights) -> SimplexState:
        """Normalize external, possibly unnormalized, nonnegative weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise SimplexError(f"weights must be nonnegative with positive sum: {w}")
        return cls(w / w.sum())

    @classmethod
    def vertex(cls, k: int, d: int) -> SimplexState:
        e = np.zeros(d + 1)
        e[k] = 1.0
        return cls(e)

    @property
    def d(self) -> int:
        return self.freqs.size - 1

    def __eq__(self, other):
        if not isinstance(other, SimplexState):
            return NotImplemented
        return np.array_equal(self.freqs, other.freqs)

    def __hash__(self):
        return hash(self.freqs.tobytes())

    def __repr__(self):
        return f"SimplexState({self.freqs.tolist()})"


@dataclass(frozen=True, eq=False)
class ReducedState:
    """Coordinates ``x_1..x_d`` of a point of the reduced simplex."""

    coords: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.coords)
        if arr.ndim != 1 or arr.size < 1:
            raise SimplexError(f"need a 1-d vector with at least 1 entry, got shape {arr.shape}")
        if np.any(arr < -SIMPLEX_TOL):
            raise SimplexError(f"coordinates must be nonnegative: {arr}")
        if arr.sum() > 1 + SIMPLEX_TOL:
            raise SimplexError(f"coordinates must sum to at most 1 (sum={arr.sum()!r})")
        object.__setattr__(self, "coords", arr)

    @property
    def d(self) -> int:
        return self.coords.size

    def __eq__(self, other):
        if not isinstance(other, ReducedState):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"ReducedState({self.coords.tolist()})"


@dataclass(frozen=True)
class MutationChannel:
    """Mutation route ``ancestor -> descendant``.

    ``rate`` is the event rate per unit of ancestor fitness and ``fraction``
    the share of the ancestor subpopulation converted at each event.
    """

    ancestor: int
    descendant: int
    rate: float
    fraction: float

    def __post_init__(self):
        if self.ancestor == self.descendant:
            raise ValueError(f"ancestor and descendant must differ (both {self.ancestor})")
        if self.ancestor < 0 or self.descendant < 0:
            raise ValueError("type indices must be nonnegative")
        if not self.rate >= 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")
        if not 0 < self.fraction <= 1:
            raise ValueError(f"fraction must lie in (0, 1], got {self.fraction}")

    @property
    def effective_rate(self) -> float:
        """``rate * fraction``, the matching deterministic mutation coefficient."""
        return self.rate * self.fraction


def lift_array(coords: np.ndarray) -> np.ndarray:
    """Prepend ``x_0 = 1 - sum`` along the last axis."""
    coords = np.asarray(coords, dtype=float)
    x0 = 1.0 - coords.sum(axis=-1, keepdims=True)
    return np.concatenate([x0, coords], axis=-1)


def jump_array(x: np.ndarray, ancestor: int, descendant: int, fraction: float) -> np.ndarray:
    """Move ``fraction * x[ancestor]`` to ``descendant`` (last axis holds types)."""
    out = np.array(x, dtype=float, copy=True)
    moved = fraction * out[..., ancestor]
    out[..., ancestor] -= moved
    out[..., descendant] += moved
    return out


def reduced_jump_array(r: np.ndarray, ancestor: int, descendant: int, fraction: float) -> np.ndarray:
    """Jump map written in reduced coordinates (type 0 implicit)."""
    out = np.array(r, dtype=float, copy=True)
    if ancestor == 0:
        moved = fraction * (1.0 - out.sum(axis=-1))
    else:
        moved = fraction * out[..., ancestor - 1]
        out[..., ancestor - 1] -= moved
    if descendant != 0:
        out[..., descendant - 1] += moved
    return out


def lift(r: ReducedState) -> SimplexState:
    return SimplexState(lift_array(r.coords))


def reduce(s: SimplexState) -> ReducedState:
    return ReducedState(s.freqs[1:])


def apply_jump(s: SimplexState, c: MutationChannel) -> SimplexState:
    """State right after one mutation event on channel ``c``."""
    if max(c.ancestor, c.descendant) > s.d:
        raise ValueError(f"channel {c.ancestor}->{c.descendant} out of range for d={s.d}")
    return SimplexState(jump_array(s.freqs, c.ancestor, c.descendant, c.fraction))
