"""Immutable undirected simple graphs and the traversal primitives built on them.

Vertices are dense 0-based integers. Adjacency is stored CSR-style: the
neighbors of ``v`` are ``indices[indptr[v]:indptr[v + 1]]``, sorted ascending.
Edge weights are kept alongside but every unweighted routine ignores them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from powergraph.errors import (
    Disconnected,
    DuplicateEdge,
    EmptyGraph,
    InvalidParams,
    InvalidWeight,
    SelfLoop,
    TooLarge,
    VertexOutOfRange,
)

EXACT_DIAMETER_LIMIT = 50_000
GIRTH_LIMIT = 10_000


class Graph:
    """Undirected simple graph, optionally edge-weighted.

    Construct with :func:`build_graph` (validating) or :meth:`from_csr`.
    Instances are never mutated after construction.
    """

    __slots__ = ("n", "indptr", "indices", "weights", "_edges", "_edge_weights")

    def __init__(self, n, indptr, indices, weights=None):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        for arr in (self.indptr, self.indices, self.weights):
            if arr is not None:
                arr.setflags(write=False)
        self._edges = None
        self._edge_weights = None

    @classmethod
    def from_csr(cls, mat: sp.spmatrix, weighted: bool = False) -> "Graph":
        """Build from a symmetric sparse matrix; the diagonal is dropped."""
        coo = sp.coo_matrix(mat)
        off = (coo.row != coo.col) & (coo.data != 0)
        mat = sp.csr_matrix((coo.data[off], (coo.row[off], coo.col[off])), shape=coo.shape)
        mat.sum_duplicates()
        mat.sort_indices()
        return cls(mat.shape[0], mat.indptr, mat.indices,
                   mat.data.astype(float) if weighted else None)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.degree(v))
        return self.weights[self.indptr[v]:self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with ``u < v``, lexicographically sorted."""
        if self._edges is None:
            rows = np.repeat(np.arange(self.n), self.degrees())
            keep = rows < self.indices
            self._edges = np.column_stack([rows[keep], self.indices[keep]])
            self._edge_weights = (np.ones(len(self._edges)) if self.weights is None
                                  else self.weights[keep])
        return self._edges

    def edge_weights(self) -> np.ndarray:
        self.edges()
        return self._edge_weights

    def adjacency(self, dtype=float) -> sp.csr_matrix:
        """0/1 adjacency as a CSR matrix (weights ignored)."""
        data = np.ones(len(self.indices), dtype=dtype)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def weighted_adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices)) if self.weights is None else self.weights
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def induced_subgraph(self, vertices: Sequence[int]) -> tuple["Graph", np.ndarray]:
        """Subgraph on ``vertices`` (relabelled in sorted order) and the old ids."""
        keep = np.unique(np.asarray(vertices, dtype=np.int64))
        sub = self.weighted_adjacency()[keep][:, keep]
        return Graph.from_csr(sub, weighted=self.weighted), keep

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or not np.array_equal(self.indptr, other.indptr):
            return False
        if not np.array_equal(self.indices, other.indices):
            return False
        if self.weighted != other.weighted:
            return False
        return not self.weighted or np.array_equal(self.weights, other.weights)

    __hash__ = None

    def __repr__(self):
        w = ", weighted" if self.weighted else ""
        return f"Graph(n={self.n}, m={self.m}{w})"


@dataclass(frozen=True)
class LabeledGraph:
    """A graph together with planted community labels in ``{1, ..., k}``."""

    graph: Graph
    labels: np.ndarray
    k: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if len(labels) != self.graph.n:
            raise InvalidParams("labels length must equal graph.n")
        if len(labels) and (labels.min() < 1 or labels.max() > self.k):
            raise InvalidParams(f"labels must lie in 1..{self.k}")
        object.__setattr__(self, "labels", labels)


def build_graph(n: int, edge_list: Iterable[Sequence[float]]) -> Graph:
    """Validate an edge list and build the graph.

    Each item is ``(u, v)`` or ``(u, v, w)``; weights default to 1 and the
    result is marked weighted if any triple was given.
    """
    if n < 0:
        raise InvalidParams("n must be non-negative")
    us, vs, ws = [], [], []
    any_weight = False
    for item in edge_list:
        u, v = int(item[0]), int(item[1])
        w = 1.0
        if len(item) > 2:
            any_weight = True
            w = float(item[2])
        if not (0 <= u < n and 0 <= v < n):
            raise VertexOutOfRange(f"edge ({u}, {v}) outside [0, {n})")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        if not w > 0 or not np.isfinite(w):
            raise InvalidWeight(f"edge ({u}, {v}) has non-positive weight {w}")
        us.append(min(u, v))
        vs.append(max(u, v))
        ws.append(w)
    return _from_pairs(n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64),
                       np.asarray(ws) if any_weight else None, check=True)


def _from_pairs(n, us, vs, ws=None, check=False) -> Graph:
    """Internal fast path: ``us < vs`` elementwise and pairs unique unless ``check``."""
    if check and len(us):
        key = us * max(n, 1) + vs
        uniq, counts = np.unique(key, return_counts=True)
        if (counts > 1).any():
            dup = uniq[counts > 1][0]
            raise DuplicateEdge(f"duplicate edge ({dup // n}, {dup % n})")
    rows = np.concatenate([us, vs])
    cols = np.concatenate([vs, us])
    data = np.ones(len(rows)) if ws is None else np.concatenate([ws, ws])
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    return Graph(n, mat.indptr, mat.indices, None if ws is None else mat.data)


def empty_graph(n: int) -> Graph:
    return Graph(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))


def _check_vertex(g: Graph, v: int):
    if not 0 <= v < g.n:
        raise VertexOutOfRange(f"vertex {v} outside [0, {g.n})")


def bfs_distances(g: Graph, source: int, radius: int) -> dict[int, int]:
    """Hop distances from ``source`` to every vertex within ``radius``."""
    _check_vertex(g, source)
    dist = {source: 0}
    queue = deque([source])
    indptr, indices = g.indptr, g.indices
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du == radius:
            continue
        for w in indices[indptr[u]:indptr[u + 1]].tolist():
            if w not in dist:
                dist[w] = du + 1
                queue.append(w)
    return dist


def bfs_layers(g: Graph, source: int, radius: int) -> list[np.ndarray]:
    """Vertices grouped by exact distance 0..radius from ``source`` (vectorised)."""
    _check_vertex(g, source)
    seen = np.zeros(g.n, dtype=bool)
    seen[source] = True
    frontier = np.array([source], dtype=np.int64)
    layers = [frontier]
    for _ in range(radius):
        if not len(frontier):
            break
        starts, ends = g.indptr[frontier], g.indptr[frontier + 1]
        nb = g.indices[_ranges(starts, ends)]
        nb = np.unique(nb[~seen[nb]])
        seen[nb] = True
        frontier = nb
        if len(nb):
            layers.append(nb)
    return layers


def _ranges(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Concatenation of ``arange(s, e)`` for each pair, without a Python loop."""
    lens = ends - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
    return np.arange(total, dtype=np.int64) + offsets


def connected_components(g: Graph) -> list[np.ndarray]:
    """Components as sorted vertex arrays, ordered by their smallest vertex."""
    if g.n == 0:
        return []
    _, lab = csgraph.connected_components(g.adjacency(), directed=False)
    order = np.argsort(lab, kind="stable")
    bounds = np.flatnonzero(np.diff(lab[order])) + 1
    comps = np.split(order, bounds)
    return sorted(comps, key=lambda c: int(c[0]))


def largest_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on the largest component and its old vertex ids.

    Ties between equally large components go to the one holding the smallest
    vertex id. ``old_ids[new] = old``.
    """
    if g.n == 0:
        raise EmptyGraph("largest_component of an empty graph")
    comps = connected_components(g)
    best = max(comps, key=lambda c: (len(c), -int(c[0])))
    if len(best) == g.n:
        return g, np.arange(g.n)
    return g.induced_subgraph(best)


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(connected_components(g)) == 1


def diameter(g: Graph, exact_limit: int = EXACT_DIAMETER_LIMIT,
             return_exact: bool = False):
    """Largest eccentricity of a connected graph.

    Exact (all-sources BFS in chunks) when ``n <= exact_limit``; otherwise an
    iterated double-sweep lower bound. With ``return_exact=True`` returns
    ``(value, exact_flag)``.
    """
    if g.n == 0:
        raise EmptyGraph("diameter of an empty graph")
    if not is_connected(g):
        raise Disconnected("diameter requires a connected graph")
    if g.n <= exact_limit:
        value, exact = _exact_diameter(g), True
    else:
        value, exact = _double_sweep(g), False
    return (value, exact) if return_exact else value


def _exact_diameter(g: Graph, words: int = 256) -> int:
    """All-sources BFS run bit-parallel: each vertex carries a bitset of the
    sources that have reached it, 64 sources per uint64 word."""
    if g.n <= 1:
        return 0
    best = 0
    for start in range(0, g.n, 64 * words):
        src = np.arange(start, min(start + 64 * words, g.n))
        w = (len(src) + 63) // 64
        seen = np.zeros((g.n, w), dtype=np.uint64)
        seen[src, (src - start) // 64] = np.left_shift(np.uint64(1), ((src - start) % 64).astype(np.uint64))
        steps = 0
        while True:
            nxt = np.bitwise_or.reduceat(seen[g.indices], g.indptr[:-1], axis=0) | seen
            if np.array_equal(nxt, seen):
                break
            seen = nxt
            steps += 1
        best = max(best, steps)
    return best


def _double_sweep(g: Graph, sweeps: int = 4) -> int:
    adj = g.adjacency()
    v, best = 0, 0
    for _ in range(sweeps):
        d = csgraph.shortest_path(adj, method="D", unweighted=True, indices=[v])[0]
        far = int(np.argmax(d))
        if d[far] <= best:
            break
        best, v = int(d[far]), far
    return best


def eccentricities(g: Graph) -> np.ndarray:
    adj = g.adjacency()
    d = csgraph.shortest_path(adj, method="D", unweighted=True)
    return d.max(axis=1)


def girth(g: Graph, limit: int = GIRTH_LIMIT) -> float:
    """Length of the shortest cycle (``inf`` for forests), BFS from every vertex."""
    if g.n > limit:
        raise TooLarge(f"girth computation guarded at n <= {limit}")
    best = np.inf
    indptr, indices = g.indptr, g.indices
    for root in range(g.n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in indices[indptr[u]:indptr[u + 1]].tolist():
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def read_edge_list(path, n: int | None = None) -> Graph:
    """Parse ``u v`` / ``u v w`` lines; ``#`` starts a comment line."""
    items = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 2:
            items.append((int(parts[0]), int(parts[1])))
        elif len(parts) == 3:
            items.append((int(parts[0]), int(parts[1]), float(parts[2])))
        else:
            raise InvalidParams(f"malformed edge line: {line!r}")
    if n is None:
        n = read_n_header(path)
    if n is None:
        n = 1 + max((max(it[0], it[1]) for it in items), default=-1)
    return build_graph(n, items)


def write_edge_list(g: Graph, path, header: str | None = None):
    lines = [f"# n={g.n}"] if header is None else [f"# {header}"]
    edges, ws = g.edges(), g.edge_weights()
    for (u, v), w in zip(edges.tolist(), ws.tolist()):
        lines.append(f"{u} {v} {w:.17g}" if g.weighted else f"{u} {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_labels(path) -> np.ndarray:
    vals = [int(s) for s in Path(path).read_text().split()]
    return np.asarray(vals, dtype=np.int64)


def write_labels(labels, path):
    Path(path).write_text("\n".join(str(int(x)) for x in labels) + "\n")


def read_n_header(path) -> int | None:
    """Recover ``n`` from a ``# n=...`` header written by :func:`write_edge_list`."""
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") and "n=" in line:
            try:
                return int(line.split("n=")[1].split()[0])
            except (IndexError, ValueError):
                return None
        if line.strip() and not line.startswith("#"):
            break
    return None
