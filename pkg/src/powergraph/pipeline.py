"""The powering meta-algorithm: clean, power, normalize, take the second eigenvector.

Also holds the weighted variants of cleaning and powering.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from powergraph.errors import EverythingDeleted, InvalidParams, InvalidR
from powergraph.graph import Graph, diameter, largest_component
from powergraph import operators as ops
from powergraph.spectral import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Partition,
    round_sign,
    top_eigs_random_walk,
)

DEFAULT_C = 0.15


@dataclass
class CleaningReport:
    n: int = 0
    deleted_high_degree: int = 0
    leaf_rounds: int = 0
    deleted_leaves: int = 0
    deleted_segment_vertices: int = 0
    deleted_non_giant: int = 0
    final_n: int = 0
    final_m: int = 0
    r: int = 0
    old_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def consistent(self) -> bool:
        removed = (self.deleted_high_degree + self.deleted_leaves
                   + self.deleted_segment_vertices + self.deleted_non_giant)
        return removed == self.n - self.final_n

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("old_ids")
        return d


@dataclass(frozen=True)
class PsiParams:
    """tau: degree cap (None means 10 (1 + average degree), inf disables);
    c: r = max(2, round(c ln^3 diam)); r_override: explicit r."""

    tau: float | None = None
    c: float = DEFAULT_C
    r_override: int | None = None
    clean: bool = True

    def __post_init__(self):
        if self.tau is not None and not self.tau >= 1:
            raise InvalidParams("tau must be >= 1")
        if not self.c > 0:
            raise InvalidParams("c must be positive")
        if self.r_override is not None and (int(self.r_override) != self.r_override
                                            or self.r_override < 1):
            raise InvalidR("r_override must be a positive integer")

    def tau_for(self, g: Graph) -> float:
        if self.tau is not None:
            return self.tau
        return 10.0 * (1.0 + 2.0 * g.m / max(g.n, 1))


def r_from_diameter(diam: int, c: float) -> int:
    return max(2, round(c * math.log(max(diam, 1)) ** 3))


# -- cleaning ------------------------------------------------------------------------

def _alive_degrees(adj: sp.csr_matrix, alive: np.ndarray) -> np.ndarray:
    deg = adj @ alive.astype(float)
    return np.where(alive, deg, 0).astype(np.int64)


def _segment_vertices(adj, alive, deg, radius) -> np.ndarray:
    """Alive vertices with no alive degree->=3 vertex within ``radius`` hops."""
    hubs = np.flatnonzero(alive & (deg >= 3))
    if len(hubs) == 0:
        return alive.copy()
    mask = sp.diags(alive.astype(float))
    sub = (mask @ adj @ mask).tocsr()
    dist = csgraph.dijkstra(sub, unweighted=True, indices=hubs, min_only=True,
                            limit=radius + 0.5)
    return alive & ~np.isfinite(dist)


def clean(g: Graph, tau: float, r: int) -> tuple[Graph, CleaningReport]:
    """Degree cap, then peel leaves and sqrt(r)-segments to a fixpoint, then the giant.

    Every sub-step deletes its whole batch simultaneously and degrees are
    recomputed between sub-steps. Raises :class:`EverythingDeleted` (with the
    report attached as ``.report``) when nothing survives.
    """
    if int(r) != r or r < 1:
        raise InvalidR("r must be a positive integer")
    radius = math.isqrt(int(r))
    rep = CleaningReport(n=g.n, r=int(r))
    adj = g.adjacency()
    alive = np.ones(g.n, dtype=bool)

    high = g.degrees() > tau
    alive &= ~high
    rep.deleted_high_degree = int(high.sum())

    while True:
        deg = _alive_degrees(adj, alive)
        leaves = alive & (deg <= 1)
        if leaves.any():
            rep.leaf_rounds += 1
            rep.deleted_leaves += int(leaves.sum())
            alive &= ~leaves
            deg = _alive_degrees(adj, alive)
        seg = _segment_vertices(adj, alive, deg, radius) if alive.any() else alive
        rep.deleted_segment_vertices += int(seg.sum())
        alive &= ~seg
        if not leaves.any() and not seg.any():
            break

    if not alive.any():
        err = EverythingDeleted("cleaning removed every vertex")
        err.report = rep
        raise err
    sub, kept = g.induced_subgraph(np.flatnonzero(alive))
    giant, idx = largest_component(sub)
    rep.deleted_non_giant = sub.n - giant.n
    rep.old_ids = kept[idx]
    rep.final_n, rep.final_m = giant.n, giant.m
    return giant, rep


def _identity_clean(g: Graph, r: int) -> tuple[Graph, CleaningReport]:
    giant, idx = largest_component(g)
    rep = CleaningReport(n=g.n, r=int(r), deleted_non_giant=g.n - giant.n,
                         final_n=giant.n, final_m=giant.m, old_ids=idx)
    return giant, rep


def choose_and_clean(g: Graph, params: PsiParams) -> tuple[Graph, CleaningReport]:
    """Clean ``g`` and settle r.

    Cleaning needs r for the segment radius while r depends on the diameter of
    the cleaned graph: start from the diameter of the degree-capped giant and
    re-clean once if the cleaned diameter implies a different r.
    """
    tau = params.tau_for(g)
    if params.r_override is not None:
        r = int(params.r_override)
        return clean(g, tau, r) if params.clean else _identity_clean(g, r)
    if not params.clean:
        giant, _ = largest_component(g)
        return _identity_clean(g, r_from_diameter(diameter(giant), params.c))
    capped_alive = np.flatnonzero(g.degrees() <= tau)
    if len(capped_alive) == 0:
        raise EverythingDeleted("degree cap removed every vertex")
    capped, _ = g.induced_subgraph(capped_alive)
    r = r_from_diameter(diameter(largest_component(capped)[0]), params.c)
    cleaned, rep = clean(g, tau, r)
    r2 = r_from_diameter(diameter(cleaned), params.c)
    if r2 != r:
        cleaned, rep = clean(g, tau, r2)
    return cleaned, rep


def psi(g: Graph, params: PsiParams) -> tuple[ops.GraphOperator, Graph, CleaningReport]:
    """D^{-1} A of the r-th power of the cleaned graph, plus the cleaned graph and report."""
    cleaned, rep = choose_and_clean(g, params)
    if cleaned.n == 1:
        op = ops.sparse_operator(sp.csr_matrix(np.ones((1, 1))), "random_walk", False, np.ones(1))
        return op, cleaned, rep
    return ops.random_walk_of(ops.powered_adjacency(cleaned, rep.r)), cleaned, rep


def backfill(g: Graph, labels: np.ndarray, surviving: np.ndarray, seed) -> np.ndarray:
    """Give each non-surviving vertex the majority label of its surviving neighbours.

    Ties and vertices with no surviving neighbour get a seeded fair coin.
    """
    out = np.zeros(g.n, dtype=np.int64)
    out[surviving] = labels
    known = np.zeros(g.n, dtype=bool)
    known[surviving] = True
    adj = g.adjacency()
    c1 = adj @ (known & (out == 1)).astype(float)
    c2 = adj @ (known & (out == 2)).astype(float)
    coin = np.random.default_rng(seed).integers(1, 3, size=g.n)
    fill = np.where(c1 > c2, 1, np.where(c2 > c1, 2, coin))
    return np.where(known, out, fill)


def meta_cluster(g: Graph, params: PsiParams | None = None, seed=0,
                 tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> Partition:
    """Sign-round the second eigenvector of psi(g), then back-fill deleted vertices."""
    params = params or PsiParams()
    op, cleaned, rep = psi(g, params)
    if cleaned.n < 3:
        labels = np.ones(cleaned.n, dtype=np.int64)
        evals, res = [], []
        degenerate = True
    else:
        adj = sp.diags(op.degrees) @ op.matrix
        pairs = top_eigs_random_walk(adj, 2, tol, max_iter, seed)
        part = round_sign(pairs[1].vector)
        labels, degenerate = part.labels, part.degenerate
        evals, res = [p.value for p in pairs], [p.residual for p in pairs]
    full = backfill(g, labels, rep.old_ids, seed)
    return Partition(full, 2, degenerate, info=dict(eigenvalues=evals, residuals=res,
                                                     r=rep.r, cleaning=rep.to_dict()))


# -- weighted variants -------------------------------------------------------------------

def weighted_power(g: Graph, r: int, c: float, guard: bool = True) -> Graph:
    """Join pairs within r hops; weight = max over simple paths of prod(w) / c^(len-1)."""
    if int(r) != r or r < 1:
        raise InvalidR("r must be a positive integer")
    if not c > 0:
        raise InvalidParams("c must be positive")
    w = g.weights if g.weighted else np.ones(len(g.indices))
    if len(w) and w.min() <= 0:
        raise InvalidParams("weights must be positive")
    if r == 1:
        return g
    if guard:
        ops._enumeration_guard(g, r, "weighted_power")
    paths = np.arange(g.n, dtype=np.int64)[:, None]
    logw = np.zeros(g.n)
    rows, cols, vals = [], [], []
    for _ in range(r):
        last = paths[:, -1]
        starts, ends = g.indptr[last], g.indptr[last + 1]
        rep = np.repeat(np.arange(len(paths)), ends - starts)
        pos = ops._ranges(starts, ends)
        nxt = g.indices[pos]
        ext = paths[rep]
        fresh = (ext != nxt[:, None]).all(axis=1)
        paths = np.column_stack([ext[fresh], nxt[fresh]])
        logw = logw[rep][fresh] + np.log(w[pos][fresh] / c)
        rows.append(paths[:, 0])
        cols.append(paths[:, -1])
        vals.append(logw)
    rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    # max per (row, col): sort by value so the last write per key wins
    order = np.argsort(vals, kind="stable")
    key = rows[order] * g.n + cols[order]
    _, last = np.unique(key[::-1], return_index=True)
    pick = order[::-1][last]
    best = sp.csr_matrix((np.exp(vals[pick]) * c, (rows[pick], cols[pick])), shape=(g.n, g.n))
    return Graph.from_csr(best, weighted=True)


def _leaf_like(g: Graph, alive: np.ndarray, W: sp.csr_matrix, r: int) -> np.ndarray:
    frac = 1.0 - 1.0 / math.sqrt(r)
    mask = sp.diags(alive.astype(float))
    Wa = (W @ mask).tocsr()
    total = np.asarray(Wa.sum(axis=1)).ravel()
    top = np.asarray(Wa.max(axis=1).todense()).ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(total > 0, top / np.where(total > 0, total, 1), 1.0)
    return alive & (ratio >= frac)


def _top_two(Wa: sp.csr_matrix, v: int):
    row = Wa.getrow(v)
    if row.nnz < 2:
        return None
    order = np.argsort(-row.data, kind="stable")[:2]
    return row.indices[order], row.data[order].sum() / row.data.sum()


def _isolated_path_centers(alive, W, r) -> np.ndarray:
    frac = 1.0 - 1.0 / math.sqrt(r)
    h = math.isqrt(r)
    mask = sp.diags(alive.astype(float))
    Wa = (W @ mask).tocsr()
    info = {}

    def path_like(v):
        if v not in info:
            t = _top_two(Wa, v) if alive[v] else None
            info[v] = t[0] if t is not None and t[1] >= frac else None
        return info[v]

    centers = np.zeros(len(alive), dtype=bool)
    for v in np.flatnonzero(alive):
        two = path_like(v)
        if two is None:
            continue
        seen, ok = {v}, True
        for start in two:
            prev, cur = v, int(start)
            for _ in range(h):
                nb = path_like(cur)
                if nb is None or prev not in nb or cur in seen:
                    ok = False
                    break
                seen.add(cur)
                prev, cur = cur, int(nb[0] if nb[1] == prev else nb[1])
            if not ok:
                break
        centers[v] = ok
    return centers


def weighted_clean(g: Graph, r: int) -> tuple[Graph, np.ndarray]:
    """Peel leaf-like vertices and centres of weight-isolated paths to a fixpoint.

    A vertex is leaf-like when at least 1 - 1/sqrt(r) of its (surviving) edge
    weight sits on one edge. A vertex is the centre of an isolated path when it
    lies in the middle of a path of 2 floor(sqrt(r)) + 2 edges whose interior
    vertices each carry at least 1 - 1/sqrt(r) of their weight on the two path
    edges. Returns the induced subgraph and the surviving old ids.
    """
    if int(r) != r or r < 4:
        raise InvalidR("weighted_clean needs r >= 4")
    W = g.weighted_adjacency()
    alive = np.ones(g.n, dtype=bool)
    while True:
        leaf = _leaf_like(g, alive, W, r)
        alive &= ~leaf
        centers = _isolated_path_centers(alive, W, r) if alive.any() else alive
        alive &= ~centers
        if not leaf.any() and not centers.any():
            break
    kept = np.flatnonzero(alive)
    sub, _ = g.induced_subgraph(kept)
    return sub, kept
