"""Edge-weight vector representation of undirected graphs and the linear
operators built on it.

A graph on ``d`` nodes with non-negative weights and no self-loops is stored
as the vector of its ``p = d(d-1)/2`` upper-triangle adjacency entries, in
row-major order ``(1,2), (1,3), ..., (1,d), (2,3), ..., (d-1,d)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def edge_count(d: int) -> int:
    """Number of free edge weights of a simple undirected graph on d nodes."""
    return d * (d - 1) // 2


def node_count_from_edges(p: int) -> int:
    """Invert p = d(d-1)/2; raises if p is not a valid edge count."""
    d = int(round((1.0 + math.sqrt(1.0 + 8.0 * p)) / 2.0))
    if d < 2 or edge_count(d) != p:
        raise ValueError(f"{p} is not d(d-1)/2 for any integer d >= 2")
    return d


@lru_cache(maxsize=None)
def edge_endpoints(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column node indices of the k-th edge, cached per graph size."""
    rows, cols = np.triu_indices(d, k=1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True)
class GraphVector:
    """Non-negative upper-triangle edge-weight vector of a graph on d nodes.

    The wrapped array is copied and frozen, so instances can be shared
    between threads and reused as dataclass fields without defensive copies.
    """

    d: int
    w: np.ndarray

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("graph needs at least 2 nodes")
        w = np.asarray(self.w, dtype=np.float64).copy()
        if w.shape != (edge_count(self.d),):
            raise ValueError(
                f"expected {edge_count(self.d)} edge weights for d={self.d}, "
                f"got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("edge weights must be finite")
        if np.any(w < 0):
            raise ValueError("edge weights must be non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def zero(cls, d: int) -> "GraphVector":
        return cls(d, np.zeros(edge_count(d)))

    @property
    def p(self) -> int:
        return self.w.shape[0]

    def edge_set(self, threshold: float = 0.0) -> np.ndarray:
        """Boolean mask of edges with weight strictly above threshold."""
        return self.w > threshold


def as_weights(w) -> np.ndarray:
    """Accept a GraphVector or a raw weight array; return the array."""
    return w.w if isinstance(w, GraphVector) else np.asarray(w, dtype=np.float64)


def to_adjacency(g: GraphVector) -> np.ndarray:
    """Symmetric adjacency matrix with zero diagonal."""
    rows, cols = edge_endpoints(g.d)
    A = np.zeros((g.d, g.d))
    A[rows, cols] = g.w
    A[cols, rows] = g.w
    return A


def from_adjacency(A: np.ndarray) -> GraphVector:
    """Inverse of to_adjacency; validates symmetry and zero diagonal."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency matrix must be square")
    if not np.allclose(A, A.T, atol=1e-12):
        raise ValueError("adjacency matrix must be symmetric")
    if np.any(np.abs(np.diag(A)) > 0):
        raise ValueError("adjacency matrix must have zero diagonal")
    d = A.shape[0]
    rows, cols = edge_endpoints(d)
    return GraphVector(d, A[rows, cols])


def to_laplacian(g: GraphVector) -> np.ndarray:
    """Combinatorial Laplacian D - A (symmetric, zero row sums, PSD)."""
    A = to_adjacency(g)
    return np.diag(A.sum(axis=1)) - A


class DegreeOperator:
    """Matrix-free linear map sending edge weights to node degrees.

    ``apply(w)`` equals the row sums of the adjacency matrix built from w;
    ``adjoint(v)`` places v[i] + v[j] at the edge position (i, j).
    """

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("graph needs at least 2 nodes")
        self.d = d
        self.p = edge_count(d)
        self._rows, self._cols = edge_endpoints(d)

    def apply(self, w) -> np.ndarray:
        w = as_weights(w)
        if w.shape != (self.p,):
            raise ValueError(f"expected {self.p} edge weights, got {w.shape}")
        return np.bincount(self._rows, weights=w, minlength=self.d) + np.bincount(
            self._cols, weights=w, minlength=self.d
        )

    def adjoint(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.d,):
            raise ValueError(f"expected a length-{self.d} node vector, got {v.shape}")
        return v[self._rows] + v[self._cols]


@lru_cache(maxsize=None)
def degree_operator(d: int) -> DegreeOperator:
    """Shared DegreeOperator instance per graph size (instances are stateless)."""
    return DegreeOperator(d)


def project_nonneg(v: np.ndarray) -> GraphVector:
    """Euclidean projection onto the non-negative orthant of edge weights."""
    v = np.asarray(v, dtype=np.float64)
    return GraphVector(node_count_from_edges(v.shape[0]), np.maximum(v, 0.0))


def soft_threshold(v: np.ndarray, mu: float) -> np.ndarray:
    """Proximal map of mu * l1-norm: sign(v) * max(|v| - mu, 0)."""
    if mu < 0:
        raise ValueError("threshold must be non-negative")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - mu, 0.0)


# --- edge-list text format ------------------------------------------------
#
# Header line "d=<n>", then one line per strictly positive edge,
# "i,j,weight" with 1-based node indices and 12 significant digits.


def to_edgelist(g: GraphVector) -> str:
    rows, cols = edge_endpoints(g.d)
    out = io.StringIO()
    out.write(f"d={g.d}\n")
    for i, j, wk in zip(rows, cols, g.w):
        if wk > 0:
            out.write(f"{i + 1},{j + 1},{wk:.12g}\n")
    return out.getvalue()


def from_edgelist(text: str) -> GraphVector:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("d="):
        raise ValueError("edge list must start with a 'd=<n>' header")
    d = int(lines[0][2:])
    w = np.zeros(edge_count(d))
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError(f"malformed edge line: {ln!r}")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        if not (0 <= i < j < d):
            raise ValueError(f"edge ({parts[0]},{parts[1]}) out of range for d={d}")
        w[edge_position(d, i, j)] = float(parts[2])
    return GraphVector(d, w)


def edge_position(d: int, i: int, j: int) -> int:
    """Flat index of edge (i, j), 0-based nodes with i < j."""
    if not (0 <= i < j < d):
        raise ValueError(f"need 0 <= i < j < d, got ({i}, {j}) with d={d}")
    # edges (i, i+1..d-1) start after all edges with smaller first node
    return i * d - i * (i + 1) // 2 + (j - i - 1)


def save_edgelist(g: GraphVector, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(to_edgelist(g))


def load_edgelist(path) -> GraphVector:
    with open(path, "r", encoding="ascii") as fh:
        return from_edgelist(fh.read())
