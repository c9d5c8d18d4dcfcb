"""Meshes of the reduced simplex and piecewise-linear interpolation on them.

Interpolation is returned as a sparse row-stochastic matrix: nonnegative
weights summing to one, so interpolated values never leave the range of
the nodal values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .simplex import SIMPLEX_TOL, SimplexError


@dataclass(frozen=True, eq=False)
class Mesh:
    """Nodes covering the reduced simplex.

    ``d == 1``: sorted nodes on [0, 1] including both endpoints.
    ``d == 2``: the lattice ``(i/n, j/n)`` with ``i + j <= n``, split into
    triangles along the anti-diagonal of every lattice square.
    """

    d: int
    nodes: np.ndarray  # (n_nodes, d)
    counts: tuple
    kind: str = "uniform"

    @classmethod
    def uniform_interval(cls, n_nodes: int = 401) -> Mesh:
        if n_nodes < 2:
            raise ValueError("need at least 2 nodes")
        return cls(1, np.linspace(0.0, 1.0, n_nodes)[:, None], (n_nodes,), "uniform")

    @classmethod
    def graded_interval(cls, n_nodes: int = 6401, split: float = 0.5, z_max: float = 25.0) -> Mesh:
        """Uniform on ``[0, split)``, then uniform in ``z = -log(1 - x)`` up to ``z_max``, plus ``x = 1``.

        Resolves the layer that forms next to ``x = 1`` at large times, where a
        uniform mesh lets the pinned value ``u(1) = 1`` leak into the interior.
        """
        if n_nodes < 8:
            raise ValueError("need at least 8 nodes")
        if not 0 < split < 1 or z_max <= -np.log1p(-split):
            raise ValueError("need 0 < split < 1 and z_max > -log(1 - split)")
        n_lo = n_nodes // 2
        lower = np.linspace(0.0, split, n_lo, endpoint=False)
        z = np.linspace(-np.log1p(-split), z_max, n_nodes - n_lo - 1)
        x = np.concatenate([lower, -np.expm1(-z), [1.0]])
        return cls(1, x[:, None], (n_nodes,), "graded")

    @classmethod
    def triangle(cls, n_div: int = 40) -> Mesh:
        if n_div < 1:
            raise ValueError("need at least one subdivision")
        i, j = np.meshgrid(np.arange(n_div + 1), np.arange(n_div + 1), indexing="ij")
        keep = (i + j) <= n_div
        nodes = np.stack([i[keep], j[keep]], axis=1) / n_div
        return cls(2, nodes, (n_div,), "triangle")

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        if self.d not in (1, 2):
            raise NotImplementedError("meshes exist for d = 1 and d = 2 only; use Monte Carlo for d >= 3")
        if self.d == 2:
            n = self.counts[0]
            lookup = -np.ones((n + 1, n + 1), dtype=np.int64)
            ij = np.rint(nodes * n).astype(np.int64)
            lookup[ij[:, 0], ij[:, 1]] = np.arange(len(nodes))
            object.__setattr__(self, "_lookup", lookup)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def x(self) -> np.ndarray:
        """1-d node coordinates (``d == 1`` only)."""
        if self.d != 1:
            raise ValueError("x is defined for d = 1 meshes")
        return self.nodes[:, 0]

    @property
    def spacing(self) -> float:
        if self.d == 1:
            return float(np.diff(self.x).max())
        return 1.0 / self.counts[0]

    def _check_inside(self, pts: np.ndarray):
        low = -pts.min(axis=1)
        high = pts.sum(axis=1) - 1.0
        worst = float(np.max(np.maximum(low, high))) if len(pts) else 0.0
        if worst > SIMPLEX_TOL:
            raise SimplexError(f"interpolation point outside the reduced simplex by {worst:.3e}")

    def interpolation_matrix(self, points) -> sparse.csr_matrix:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.d:
            raise ValueError(f"points have dimension {pts.shape[1]}, mesh has {self.d}")
        self._check_inside(pts)
        if self.d == 1:
            return self._interp_1d(pts[:, 0])
        return self._interp_2d(pts)

    def _interp_1d(self, p: np.ndarray) -> sparse.csr_matrix:
        x = self.x
        p = np.clip(p, 0.0, 1.0)
        left = np.clip(np.searchsorted(x, p, side="right") - 1, 0, x.size - 2)
        w = (p - x[left]) / (x[left + 1] - x[left])
        w = np.clip(w, 0.0, 1.0)
        rows = np.repeat(np.arange(p.size), 2)
        cols = np.stack([left, left + 1], axis=1).ravel()
        vals = np.stack([1.0 - w, w], axis=1).ravel()
        return sparse.csr_matrix((vals, (rows, cols)), shape=(p.size, x.size))

    def _interp_2d(self, p: np.ndarray) -> sparse.csr_matrix:
        n = self.counts[0]
        q = np.clip(p, 0.0, 1.0) * n
        i = np.minimum(np.floor(q[:, 0]).astype(np.int64), n - 1)
        j = np.minimum(np.floor(q[:, 1]).astype(np.int64), n - 1)
        # keep (i, j) a valid lower-left corner: i + j <= n - 1
        over = (i + j) > n - 1
        j = np.where(over, n - 1 - i, j)
        a = q[:, 0] - i
        b = q[:, 1] - j
        # cells touching the hypotenuse have no upper triangle
        lower = ((a + b) <= 1.0) | ((i + j) >= n - 1)
        lk = self._lookup
        # lower triangle (i,j),(i+1,j),(i,j+1); upper triangle (i+1,j+1),(i,j+1),(i+1,j)
        c0 = np.where(lower, lk[i, j], lk[np.minimum(i + 1, n), np.minimum(j + 1, n)])
        c1 = lk[np.minimum(i + 1, n), j]
        c2 = lk[i, np.minimum(j + 1, n)]
        w0 = np.where(lower, 1.0 - a - b, a + b - 1.0)
        w1 = np.where(lower, a, 1.0 - b)
        w2 = np.where(lower, b, 1.0 - a)
        w = np.clip(np.stack([w0, w1, w2], axis=1), 0.0, None)
        w /= w.sum(axis=1, keepdims=True)
        cols = np.stack([c0, c1, c2], axis=1)
        if np.any(cols[w > 0] < 0):
            raise SimplexError("interpolation stencil left the triangle lattice")
        cols = np.where(cols < 0, 0, cols)
        rows = np.repeat(np.arange(len(p)), 3)
        return sparse.csr_matrix((w.ravel(), (rows, cols.ravel())), shape=(len(p), self.n_nodes))


@dataclass
class GridFunction:
    """Nodal values of ``u_k(., time)`` on ``mesh``."""

    mesh: Mesh
    component: int
    values: np.ndarray
    time: float

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.mesh.d == 1 and pts.ndim <= 1:
            pts = pts.reshape(-1, 1)
        return self.mesh.interpolation_matrix(pts) @ self.values
