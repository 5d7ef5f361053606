"""Simple undirected graphs, the G(n, p) and G(n, p, d) samplers, and edge-list I/O.

Adjacency is stored as packed bit rows (``np.packbits`` along each row);
a CSR copy is built lazily for matrix-vector products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import IndexOutOfRange, InvalidArgument, ParseError
from .sphere import PointCloud, sample_sphere_points, threshold


@dataclass(frozen=True)
class GraphProvenance:
    model: str  # "ER", "RGG" or "file"
    n: int
    p: Optional[float] = None
    d: Optional[int] = None
    seed: Optional[int] = None
    t: Optional[float] = None

    def __post_init__(self):
        if self.model not in ("ER", "RGG", "file"):
            raise InvalidArgument(f"unknown model {self.model!r}")
        if self.model == "RGG" and (self.d is None or self.d < 2):
            raise InvalidArgument("RGG provenance needs d >= 2")

    def to_dict(self) -> dict:
        return {"model": self.model, "n": self.n, "p": self.p, "d": self.d,
                "seed": self.seed, "t": self.t}


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    bits: np.ndarray
    degrees: np.ndarray
    self_loops: bool = False
    provenance: Optional[GraphProvenance] = field(default=None, compare=False)

    @classmethod
    def from_dense(cls, adj, self_loops=False, provenance=None) -> "Graph":
        adj = np.asarray(adj).astype(bool)
        n = adj.shape[0]
        if adj.shape != (n, n) or n < 1:
            raise InvalidArgument(f"adjacency must be square and nonempty, got {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise InvalidArgument("adjacency must be symmetric")
        if not self_loops and adj.diagonal().any():
            raise InvalidArgument("diagonal entries present but self_loops=False")
        bits = np.packbits(adj, axis=1)
        bits.setflags(write=False)
        degrees = adj.sum(axis=1, dtype=np.int64)
        degrees.setflags(write=False)
        return cls(n, bits, degrees, self_loops, provenance)

    @classmethod
    def from_edges(cls, n, edges, self_loops=False, provenance=None) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise InvalidArgument("edge endpoint out of range")
        adj[edges[:, 0], edges[:, 1]] = True
        adj[edges[:, 1], edges[:, 0]] = True
        return cls.from_dense(adj, self_loops, provenance)

    def dense(self) -> np.ndarray:
        return np.unpackbits(self.bits, axis=1, count=self.n).astype(bool)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.bits[i, j >> 3] & (0x80 >> (j & 7)))

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.dense(), dtype=np.float64)

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges i <= j (i == j only for self-loops)."""
        upper = sp.triu(self.csr, format="coo")
        order = np.lexsort((upper.col, upper.row))
        return np.column_stack([upper.row[order], upper.col[order]]).astype(np.int64)

    @property
    def n_edges(self) -> int:
        return int(sp.triu(self.csr).nnz)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.csr @ v

    def with_self_loops(self) -> "Graph":
        """Copy with every diagonal entry set, the RGG convention <X_i, X_i> = 1."""
        a = self.dense()
        np.fill_diagonal(a, True)
        return Graph.from_dense(a, True, self.provenance)

    def permuted(self, perm) -> "Graph":
        a = self.dense()
        return Graph.from_dense(a[np.ix_(perm, perm)], self.self_loops, self.provenance)


def _check_size(g: Graph, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.n,):
        raise InvalidArgument(f"vector of length {v.shape} does not match n={g.n}")
    return v


def sample_er(n: int, p: float, rng: np.random.Generator, self_loops=False, seed=None) -> Graph:
    """G(n, p).  With ``self_loops`` each diagonal entry is an independent Bernoulli(p)."""
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"p must lie in [0, 1], got {p}")
    u = rng.random((n, n))
    k = 0 if self_loops else 1
    upper = np.triu(u < p, k=k)
    adj = upper | upper.T
    return Graph.from_dense(adj, self_loops, GraphProvenance("ER", n, p, seed=seed))


def sample_rgg(n: int, p: float, d: int, rng: np.random.Generator, self_loops=False,
               seed=None, t: Optional[float] = None):
    """G(n, p, d) on S^{d-1}: edge iff <X_i, X_j> >= t(p, d).

    Returns (graph, cloud).  ``t`` can be passed to skip the quantile inversion.
    With ``self_loops`` the diagonal is all ones, since <X_i, X_i> = 1 >= t.
    """
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"p must lie in (0, 1), got {p}")
    if d < 2:
        raise InvalidArgument(f"d must be >= 2, got {d}")
    if t is None:
        t = threshold(p, d).t
    cloud = sample_sphere_points(n, d, rng)
    adj = cloud.gram() >= t
    np.fill_diagonal(adj, self_loops)
    prov = GraphProvenance("RGG", n, p, d, seed=seed, t=t)
    return Graph.from_dense(adj, self_loops, prov), cloud


def rgg_from_cloud(cloud: PointCloud, p: float, self_loops=False) -> Graph:
    t = threshold(p, cloud.d).t
    adj = cloud.gram() >= t
    np.fill_diagonal(adj, self_loops)
    return Graph.from_dense(adj, self_loops, GraphProvenance("RGG", cloud.n, p, cloud.d, t=t))


def laplacian_quadratic(g: Graph, v) -> float:
    """v^T L v as the edge sum of (v_i - v_j)^2; self-loops contribute nothing."""
    v = _check_size(g, v)
    e = g.edges()
    diff = v[e[:, 0]] - v[e[:, 1]]
    return float(diff @ diff)


def is_connected(g: Graph) -> bool:
    ncomp, _ = connected_components(g.csr, directed=False)
    return ncomp == 1


def subgraph_of(g1: Graph, g2: Graph) -> bool:
    if g1.n != g2.n:
        raise InvalidArgument(f"size mismatch: {g1.n} vs {g2.n}")
    return not np.any(g1.bits & ~g2.bits)


# edge-list files: "n m self_loops" header, then m lines "i j", 0-indexed, i < j

def save_graph(g: Graph, path) -> None:
    e = g.edges()
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{g.n} {len(e)} {int(g.self_loops)}\n")
        fh.writelines(f"{i} {j}\n" for i, j in e)


def load_graph(path) -> Graph:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    try:
        n, m, loops = (int(x) for x in lines[0].split())
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}, expected 'n m self_loops'", 1) from None
    if n < 1 or m < 0 or loops not in (0, 1):
        raise ParseError(f"bad header values {lines[0]!r}", 1)
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"header declares {m} edges, found {len(body)} lines", 1)
    adj = np.zeros((n, n), dtype=bool)
    for k, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'i j', got {line!r}", k)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", k) from None
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"vertex index out of range [0, {n}) in {line!r}", k)
        if i == j and not loops:
            raise ParseError(f"self-loop {line!r} but self_loops=0", k)
        if i > j:
            raise ParseError(f"edge {line!r} not written as i < j", k)
        if adj[i, j]:
            raise ParseError(f"duplicate edge {line!r}", k)
        adj[i, j] = adj[j, i] = True
    return Graph.from_dense(adj, bool(loops), GraphProvenance("file", n))
