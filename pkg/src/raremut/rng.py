"""Counter-based uniform streams keyed by ``(seed, path_index)``.

Draw ``n`` of path ``j`` is a pure function of ``(seed, j, n)``: the
SplitMix64 output function applied to ``key_j + (n + 1) * GOLDEN``.  Paths
can therefore be simulated in any batch layout or order and still produce
bit-identical samples, which numpy's sequential generators cannot offer
when thousands of paths advance in lockstep.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_PATH_SALT = np.uint64(0xD1B54A32D192ED03)
_TWO_M53 = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def path_keys(seed: int, path_index) -> np.ndarray:
    seed = check_seed(seed)
    idx = np.asarray(path_index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(_mix64(np.uint64(seed)) ^ (idx * _PATH_SALT + GOLDEN))


def uniforms(keys: np.ndarray, counters) -> np.ndarray:
    """Uniform draws in the open interval (0, 1), one per ``(key, counter)`` pair."""
    keys = np.asarray(keys, dtype=np.uint64)
    ctr = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64(keys + (ctr + np.uint64(1)) * GOLDEN)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


class PathStream:
    """Sequential view of one path's stream (convenience for scalar code)."""

    def __init__(self, seed: int, path_index: int = 0):
        self.key = path_keys(seed, path_index)
        self.counter = 0

    def uniform(self) -> float:
        u = float(uniforms(self.key, self.counter))
        self.counter += 1
        return u
