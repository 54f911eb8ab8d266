"""Vectorized representation of undirected weighted graphs.

A graph on ``n`` nodes is stored as the length ``r = n(n-1)/2`` vector of its
upper-triangular adjacency entries, enumerated in lexicographic order
(0,1), (0,2), ..., (0,n-1), (1,2), ...  The linear map taking edge weights to
nodal degrees (and its adjoint) is applied implicitly through the slot table,
so every operation here costs O(r); dense matrices are assembled only for
testing and metrics.
"""

from __future__ import annotations

import numpy as np


def edge_count(n: int) -> int:
    """Number of edge slots of an n-node simple undirected graph."""
    return n * (n - 1) // 2


def degree_map_norm_sq(n: int) -> float:
    """Largest singular value squared of the edge-to-degree map: 2(n-1)."""
    return 2.0 * (n - 1)


class EdgeIndexing:
    """Slot table for the upper-triangular edge layout of an n-node graph.

    Attributes
    ----------
    n : int
        Node count (>= 2).
    r : int
        Edge-slot count, n(n-1)/2.
    rows, cols : ndarray of int
        Endpoint tables: slot ``e`` connects nodes ``rows[e] < cols[e]``.
    """

    def __init__(self, n: int):
        n = int(n)
        if n < 2:
            raise ValueError(f"need at least 2 nodes, got {n}")
        self.n = n
        self.r = edge_count(n)
        # np.triu_indices enumerates pairs exactly in the lexicographic
        # order the layout requires; int32 keeps the slot tables compact
        rows, cols = np.triu_indices(n, k=1)
        self.rows = rows.astype(np.int32)
        self.cols = cols.astype(np.int32)

    def __repr__(self):
        return f"EdgeIndexing(n={self.n})"

    def slot_of(self, i: int, j: int) -> int:
        """Slot of the edge between nodes i and j, requiring 0 <= i < j < n."""
        if not 0 <= i < j < self.n:
            raise ValueError(f"invalid node pair ({i}, {j}) for n={self.n}")
        return i * (2 * self.n - i - 1) // 2 + (j - i - 1)

    def pair_of(self, slot: int) -> tuple[int, int]:
        """Node pair (i, j) with i < j stored at the given slot."""
        if not 0 <= slot < self.r:
            raise ValueError(f"slot {slot} out of range for r={self.r}")
        return int(self.rows[slot]), int(self.cols[slot])

    def check_edge_vector(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.r,):
            raise ValueError(f"edge vector has shape {w.shape}, expected ({self.r},)")
        return w

    def check_node_vector(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"node vector has shape {u.shape}, expected ({self.n},)")
        return u

    def degrees(self, w) -> np.ndarray:
        """Nodal degree vector of the edge weights w (the map S applied to w)."""
        w = self.check_edge_vector(w)
        return np.bincount(self.rows, weights=w, minlength=self.n) + np.bincount(
            self.cols, weights=w, minlength=self.n
        )

    def degree_adjoint(self, u) -> np.ndarray:
        """Adjoint of the degree map: slot (i, j) receives u[i] + u[j]."""
        u = self.check_node_vector(u)
        return u[self.rows] + u[self.cols]

    def adjacency(self, w) -> np.ndarray:
        """Dense symmetric hollow adjacency matrix (testing/metrics only)."""
        w = self.check_edge_vector(w)
        a = np.zeros((self.n, self.n))
        a[self.rows, self.cols] = w
        return a + a.T

    def laplacian(self, w) -> np.ndarray:
        """Dense combinatorial Laplacian diag(degrees) - adjacency."""
        lap = -self.adjacency(w)
        np.fill_diagonal(lap, self.degrees(w))
        return lap

    def total_variation(self, w, x) -> float:
        """Dirichlet energy of the signal x on the graph with edge weights w.

        Equals x' L x with L the Laplacian of w, computed edgewise as
        sum_e w_e (x_i - x_j)^2 without assembling L.
        """
        w = self.check_edge_vector(w)
        x = self.check_node_vector(x)
        diff = x[self.rows] - x[self.cols]
        return float(w @ (diff * diff))
