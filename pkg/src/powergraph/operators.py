"""Graph-derived matrices and matrix-free operators.

Covers graph powering A^(r), the r-power-cut, the exact-distance matrix A^[r],
self-avoiding-walk counts A^{r}, the nonbacktracking family (B, B^(r), the
adjusted B-hat) and the classical spectral matrices.

Sparse symmetric matrices are returned as ``scipy.sparse.csr_matrix``.
Operators subclass ``scipy.sparse.linalg.LinearOperator`` so they plug
straight into the eigensolvers.

Directed edges are indexed by CSR position: the edge ``u -> v`` has id ``p``
where ``g.indices[p] == v`` and ``g.indptr[u] <= p < g.indptr[u + 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from powergraph.errors import (
    EmptyGraph,
    InvalidParams,
    InvalidR,
    TooLarge,
    ZeroDegree,
)
from powergraph.graph import Graph, _ranges

ENUMERATION_GUARD = 10**9

CLASSICAL_KINDS = ("adjacency", "adjacency_with_loops", "laplacian",
                   "normalized_laplacian", "random_walk")


class GraphOperator(LinearOperator):
    """A linear operator with a name, a symmetry flag and optional backing matrix."""

    def __init__(self, apply, dim, name, symmetric=False, matrix=None, degrees=None,
                 apply_transpose=None):
        super().__init__(dtype=np.float64, shape=(dim, dim))
        self._apply = apply
        self._apply_t = apply_transpose
        self.name = name
        self.symmetric = symmetric
        self.matrix = matrix
        self.degrees = degrees

    @property
    def dim(self) -> int:
        return self.shape[0]

    def _matvec(self, x):
        return self._apply(np.asarray(x, dtype=float).ravel())

    def _rmatvec(self, x):
        if self.symmetric:
            return self._matvec(x)
        if self._apply_t is None:
            raise NotImplementedError(f"{self.name} has no transpose apply")
        return self._apply_t(np.asarray(x, dtype=float).ravel())

    def apply(self, x):
        return self.matvec(x)

    def to_dense(self) -> np.ndarray:
        if self.matrix is not None:
            return np.asarray(self.matrix.todense(), dtype=float)
        eye = np.eye(self.dim)
        return np.column_stack([self._matvec(eye[:, i]) for i in range(self.dim)])


def sparse_operator(mat: sp.spmatrix, name: str, symmetric: bool, degrees=None) -> GraphOperator:
    mat = sp.csr_matrix(mat, dtype=float)
    mt = mat.T.tocsr()
    return GraphOperator(lambda x: mat @ x, mat.shape[0], name, symmetric, mat, degrees,
                         apply_transpose=lambda x: mt @ x)


# -- powering ----------------------------------------------------------------

def _check_r(r, minimum=1):
    if int(r) != r or r < minimum:
        raise InvalidR(f"r must be an integer >= {minimum}, got {r}")


def reach_matrices(g: Graph, r: int) -> list[sp.csr_matrix]:
    """0/1 matrices R_0..R_r where R_k marks pairs at hop distance <= k.

    Each level is the previous one expanded by one BFS step from every
    source at once, i.e. a row-wise truncated BFS.
    """
    step = (g.adjacency(np.float32) + sp.identity(g.n, dtype=np.float32, format="csr")).tocsr()
    cur = sp.identity(g.n, dtype=np.float32, format="csr")
    out = [cur]
    for _ in range(r):
        nxt = (cur @ step).tocsr()
        nxt.data[:] = 1
        if nxt.nnz == cur.nnz:
            # saturated: every ball already covers its component
            out.extend([nxt] * (r + 1 - len(out)))
            break
        cur = nxt
        out.append(cur)
    return out


def powered_adjacency(g: Graph, r: int) -> sp.csr_matrix:
    """Adjacency of G^(r) without the diagonal."""
    _check_r(r)
    reach = reach_matrices(g, r)[-1].tocoo()
    off = reach.row != reach.col
    return sp.csr_matrix((np.ones(off.sum()), (reach.row[off], reach.col[off])),
                         shape=(g.n, g.n))


def graph_power(g: Graph, r: int) -> Graph:
    """G^(r): join every pair of distinct vertices at hop distance <= r."""
    _check_r(r)
    if r == 1:
        return Graph(g.n, g.indptr, g.indices)
    return Graph.from_csr(powered_adjacency(g, r))


def power_cut_size(g: Graph, r: int, S) -> int:
    """Number of pairs (u in S, v not in S) at hop distance <= r."""
    _check_r(r)
    mask = np.zeros(g.n, dtype=bool)
    mask[np.asarray(list(S), dtype=np.int64)] = True
    if not mask.any() or mask.all():
        return 0
    edges = graph_power(g, r).edges()
    return int((mask[edges[:, 0]] != mask[edges[:, 1]]).sum())


def distance_matrix(g: Graph, r: int) -> sp.csr_matrix:
    """0/1 indicator of pairs at hop distance exactly ``r`` (identity for r=0)."""
    _check_r(r, minimum=0)
    reach = reach_matrices(g, r)
    if r == 0:
        return sp.identity(g.n, format="csr")
    diff = (reach[r] - reach[r - 1]).tocsr()
    diff.eliminate_zeros()
    return sp.csr_matrix(diff, dtype=float)


# -- self-avoiding walks -------------------------------------------------------

def _enumeration_guard(g: Graph, r: int, what: str):
    dmax = int(g.degrees().max()) if g.n else 0
    cost = g.n * float(dmax) ** r
    if cost > ENUMERATION_GUARD:
        raise TooLarge(f"{what}: n * maxdeg^r = {cost:.3g} exceeds {ENUMERATION_GUARD:.0e}")


def simple_paths(g: Graph, r: int) -> np.ndarray:
    """All simple paths with exactly ``r`` edges, one row per path (both directions)."""
    paths = np.arange(g.n, dtype=np.int64)[:, None]
    for _ in range(r):
        last = paths[:, -1]
        starts, ends = g.indptr[last], g.indptr[last + 1]
        rep = np.repeat(np.arange(len(paths)), ends - starts)
        nxt = g.indices[_ranges(starts, ends)]
        ext = paths[rep]
        fresh = (ext != nxt[:, None]).all(axis=1)
        paths = np.column_stack([ext[fresh], nxt[fresh]])
    return paths


def saw_matrix(g: Graph, r: int, guard: bool = True) -> sp.csr_matrix:
    """Entry (i, j) counts self-avoiding walks (simple paths) of length r from i to j."""
    _check_r(r)
    if guard:
        _enumeration_guard(g, r, "saw_matrix")
    paths = simple_paths(g, r)
    mat = sp.csr_matrix((np.ones(len(paths)), (paths[:, 0], paths[:, -1])), shape=(g.n, g.n))
    mat.sum_duplicates()
    return mat


# -- nonbacktracking family --------------------------------------------------------

@dataclass(frozen=True)
class DirectedEdgeSpace:
    """Indexing of the 2|E| directed edges of a graph by CSR position."""

    tail: np.ndarray
    head: np.ndarray
    rev: np.ndarray

    @classmethod
    def of(cls, g: Graph) -> "DirectedEdgeSpace":
        tail = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees())
        head = g.indices.copy()
        # (head, tail) pairs sorted lexicographically land on CSR positions
        rev = np.lexsort((tail, head))
        return cls(tail, head, rev)

    @property
    def size(self) -> int:
        return len(self.tail)

    def index(self, g: Graph, u: int, v: int) -> int:
        nb = g.neighbors(u)
        i = int(np.searchsorted(nb, v))
        if i >= len(nb) or nb[i] != v:
            raise KeyError(f"({u}, {v}) is not an edge")
        return int(g.indptr[u]) + i

    def reverse(self, e: int) -> int:
        return int(self.rev[e])


def nonbacktracking(g: Graph) -> GraphOperator:
    """B: (B w)[(v1, v2)] = sum of w over edges (x, v1) with x != v2."""
    if g.m == 0:
        raise EmptyGraph("nonbacktracking operator needs at least one edge")
    des = DirectedEdgeSpace.of(g)
    tail, head, rev, n = des.tail, des.head, des.rev, g.n

    def apply(w):
        into = np.bincount(head, weights=w, minlength=n)
        return into[tail] - w[rev]

    def apply_t(w):
        out = np.bincount(tail, weights=w, minlength=n)
        return out[head] - w[rev]

    op = GraphOperator(apply, des.size, "nonbacktracking", symmetric=False,
                       apply_transpose=apply_t)
    op.edge_space = des
    return op


def nonbacktracking_matrix(g: Graph) -> sp.csr_matrix:
    """Explicit sparse B, same convention as :func:`nonbacktracking`."""
    des = DirectedEdgeSpace.of(g)
    rows, cols = [], []
    for e in range(des.size):
        v1, v2 = des.tail[e], des.head[e]
        # edges f = (x, v1) with x != v2
        for f in range(g.indptr[v1], g.indptr[v1 + 1]):
            f_rev = des.rev[f]  # (x, v1)
            if des.tail[f_rev] != v2:
                rows.append(e)
                cols.append(f_rev)
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(des.size, des.size))


def powered_nonbacktracking(g: Graph, r: int, guard: bool = True) -> sp.csr_matrix:
    """B^(r) = 1(B^r >= 1): reachability by nonbacktracking walks of exactly r steps."""
    _check_r(r)
    if g.m == 0:
        raise EmptyGraph("powered_nonbacktracking needs at least one edge")
    if guard:
        _enumeration_guard(g, r, "powered_nonbacktracking")
    B = nonbacktracking_matrix(g)
    cur = B.copy()
    for _ in range(r - 1):
        cur = (cur @ B).tocsr()
        cur.data[:] = 1
    cur.eliminate_zeros()
    return cur


def _non_neighbor_sums(g: Graph, x: np.ndarray) -> np.ndarray:
    """For each vertex v: sum of x over vertices that are neither v nor adjacent to v."""
    nb_sum = g.adjacency() @ x
    return x.sum() - x - nb_sum


def adjusted_nonbacktracking(g: Graph, d: float) -> GraphOperator:
    """B-hat on the (2|E| + n)-dimensional edge+vertex space.

    Coordinates ``[0, 2|E|)`` are directed edges, ``[2|E|, 2|E| + n)`` vertices.
    Edge (v, v'):  sum_{v'' ~ v', v'' != v} w[(v', v'')]/d - sum_{v'' !~ v', v'' != v'} w[v'']/n
    Vertex v:      sum_{v' ~ v} w[(v, v')]/d            - sum_{v' !~ v, v' != v} w[v']/n
    Non-edge sums use the total-minus-exclusions trick, O(n + m) per apply.
    """
    if not d > 0:
        raise InvalidParams("d must be positive")
    des = DirectedEdgeSpace.of(g)
    m2, n = des.size, g.n
    adj = g.adjacency()
    tail, head, rev = des.tail, des.head, des.rev

    def apply(w):
        we, wv = w[:m2], w[m2:]
        out_sum = np.bincount(tail, weights=we, minlength=n)
        non = wv.sum() - wv - adj @ wv
        edge_part = (out_sum[head] - we[rev]) / d - non[head] / n
        vert_part = out_sum / d - non / n
        return np.concatenate([edge_part, vert_part])

    op = GraphOperator(apply, m2 + n, "adjusted_nonbacktracking", symmetric=False)
    op.edge_space = des
    return op


# -- classical operators ---------------------------------------------------------

def classical_operator(g: Graph, kind: str) -> GraphOperator:
    """Matrix-backed operator of the given kind.

    ``random_walk`` is D^{-1} A: row u of A scaled by 1/deg(u), so the
    all-ones vector is a right eigenvector with eigenvalue 1.
    """
    if kind not in CLASSICAL_KINDS:
        raise InvalidParams(f"unknown operator kind {kind!r}")
    A = g.adjacency()
    deg = g.degrees().astype(float)
    if kind == "adjacency":
        return sparse_operator(A, kind, True, deg)
    if kind == "adjacency_with_loops":
        return sparse_operator(A + sp.identity(g.n), kind, True, deg)
    if kind == "laplacian":
        return sparse_operator(sp.diags(deg) - A, kind, True, deg)
    if g.n and deg.min() < 1:
        raise ZeroDegree(f"{kind} needs every degree >= 1")
    if kind == "normalized_laplacian":
        s = sp.diags(1 / np.sqrt(deg))
        return sparse_operator(sp.identity(g.n) - s @ A @ s, kind, True, deg)
    return sparse_operator(sp.diags(1 / deg) @ A, kind, False, deg)


def random_walk_of(adj: sp.spmatrix) -> GraphOperator:
    """D^{-1} A for an arbitrary symmetric 0/1 matrix (used on powered graphs)."""
    adj = sp.csr_matrix(adj, dtype=float)
    deg = np.asarray(adj.sum(axis=1)).ravel()
    if len(deg) and deg.min() <= 0:
        raise ZeroDegree("random walk needs every degree >= 1")
    return sparse_operator(sp.diags(1 / deg) @ adj, "random_walk", False, deg)


def linearity_defect(op: LinearOperator, seed: int = 0) -> float:
    """Relative error of ``op(a x + b y) - a op(x) - b op(y)`` on random probes."""
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(op.shape[1]), rng.standard_normal(op.shape[1])
    a, b = rng.standard_normal(2)
    lhs = op.matvec(a * x + b * y)
    rhs = a * op.matvec(x) + b * op.matvec(y)
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), 1e-300)
    return float(np.linalg.norm(lhs - rhs) / scale)


def ball_cyclomatic_numbers(g: Graph, r: int) -> np.ndarray:
    """Cyclomatic number m - n + 1 of the subgraph induced by each vertex's r-ball."""
    _check_r(r, minimum=0)
    R = sp.csr_matrix(reach_matrices(g, r)[-1], dtype=float)
    sizes = np.asarray(R.sum(axis=1)).ravel()
    # (R A)[v, w] counts ball members adjacent to w; restricting w to the ball
    # counts each internal edge twice
    internal = np.asarray((R @ g.adjacency()).multiply(R).sum(axis=1)).ravel() / 2
    return np.rint(internal - sizes + 1).astype(np.int64)


def local_tree_like(g: Graph, r: int) -> bool:
    """True when no r-ball contains two independent cycles."""
    return bool(g.n == 0 or ball_cyclomatic_numbers(g, r).max() <= 1)
