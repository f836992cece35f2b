"""Seeded random graph models and a few fixed named graphs.

Randomness comes from numpy's PCG64 bit generator. A seed is expanded with
``numpy.random.SeedSequence`` into independent child streams (labels, pair
candidates, thinning, geometry, ...), so a model's output depends only on
``(params, seed)``. Trial seeds for sweeps are derived by hashing with
:func:`derive_seed`, which makes results independent of execution order.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from powergraph.errors import InvalidParams, ParityError, RetriesExhausted
from powergraph.graph import Graph, LabeledGraph, _from_pairs, build_graph

MAX_REGULAR_RETRIES = 1000


def derive_seed(*keys) -> int:
    """Stable 63-bit seed from any sequence of printable keys."""
    text = "\x1f".join(repr(k) for k in keys).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little") >> 1


def _streams(seed, count: int) -> list[np.random.Generator]:
    ss = np.random.SeedSequence(int(seed))
    return [np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(count)]


@dataclass(frozen=True)
class SbmParams:
    """General SBM: ``n`` vertices, community prior ``p``, pair probabilities ``W``."""

    n: int
    p: tuple
    W: tuple

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        W = np.asarray(self.W, dtype=float)
        if self.n < 0:
            raise InvalidParams("n must be non-negative")
        if p.ndim != 1 or len(p) == 0 or (p < 0).any() or abs(p.sum() - 1) > 1e-12:
            raise InvalidParams("p must be a probability vector")
        if W.shape != (len(p), len(p)):
            raise InvalidParams("W must be k x k")
        if not np.allclose(W, W.T, atol=0, rtol=0) or (W < 0).any() or (W > 1).any():
            raise InvalidParams("W must be symmetric with entries in [0, 1]")
        object.__setattr__(self, "p", tuple(p.tolist()))
        object.__setattr__(self, "W", tuple(map(tuple, W.tolist())))

    @property
    def k(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class GbmParams:
    n: int
    s: float
    t: float

    def __post_init__(self):
        if self.n < 1 or self.s < 0 or self.t < 0:
            raise InvalidParams("GBM needs n >= 1 and s, t >= 0")


@dataclass(frozen=True)
class HbmParams:
    n: int
    a: float
    b: float
    s: float
    t: float
    h1: float
    h2: float

    def __post_init__(self):
        if self.n < 1 or min(self.a, self.b, self.s, self.t) < 0:
            raise InvalidParams("HBM needs n >= 1 and a, b, s, t >= 0")
        if not (0 <= self.h1 <= 1 and 0 <= self.h2 <= 1):
            raise InvalidParams("h1, h2 must lie in [0, 1]")
        if max(self.a, self.b) > self.n:
            raise InvalidParams("a/n and b/n must be probabilities")


def snr(a: float, b: float) -> float:
    """Signal-to-noise ratio (a - b)^2 / (2 (a + b)); 1 is the KS threshold."""
    return (a - b) ** 2 / (2 * (a + b))


def sbm_rates_for_snr(snr_value: float, avg_degree: float) -> tuple[float, float]:
    """(a, b) with (a + b)/2 = avg_degree and the requested SNR, a >= b."""
    gap = np.sqrt(snr_value * 2 * (2 * avg_degree))
    return avg_degree + gap / 2, avg_degree - gap / 2


# -- pair sampling ---------------------------------------------------------

def _pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _skip_sample(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``[0, total)`` kept independently with probability ``p``.

    Geometric skipping: gaps between kept indices are Geometric(p).
    """
    if total <= 0 or p <= 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    while True:
        batch = int(max(16, (total - pos) * p * 1.1 + 10 * np.sqrt((total - pos) * p + 1)))
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        done = idx[-1] >= total
        if done:
            idx = idx[idx < total]
        chunks.append(idx)
        if done:
            break
        pos = int(idx[-1])
    return np.concatenate(chunks).astype(np.int64)


def _decode_pairs(n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map lexicographic pair indices to ``(i, j)`` with ``i < j``."""
    if not len(idx):
        e = np.zeros(0, dtype=np.int64)
        return e, e
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    offset = i * (2 * n - i - 1) // 2
    # float rounding can leave i off by one in either direction
    over = offset > idx
    i[over] -= 1
    offset = i * (2 * n - i - 1) // 2
    under = idx - offset >= n - 1 - i
    i[under] += 1
    offset = i * (2 * n - i - 1) // 2
    j = idx - offset + i + 1
    return i, j


def _sample_sbm_edges(n, labels, W, cand_rng, thin_rng):
    """Edges of an SBM given labels; labels are 0-based community indices."""
    W = np.asarray(W, dtype=float)
    pmax = float(W.max()) if W.size else 0.0
    idx = _skip_sample(_pair_count(n), pmax, cand_rng)
    i, j = _decode_pairs(n, idx)
    u = thin_rng.random(len(idx))
    if pmax > 0:
        keep = u < W[labels[i], labels[j]] / pmax
        i, j = i[keep], j[keep]
    return i, j


# -- models ----------------------------------------------------------------

def gen_sbm_general(params: SbmParams, seed) -> LabeledGraph:
    """SBM(n, p, W): i.i.d. labels from ``p``, pairs kept w.p. ``W[X_i, X_j]``."""
    lab_rng, cand_rng, thin_rng = _streams(seed, 3)
    n = params.n
    labels0 = lab_rng.choice(params.k, size=n, p=np.asarray(params.p))
    i, j = _sample_sbm_edges(n, labels0, params.W, cand_rng, thin_rng)
    g = _from_pairs(n, i, j)
    return LabeledGraph(g, labels0 + 1, params.k,
                        {"model": "sbm", "n": n, "p": list(params.p),
                         "W": [list(r) for r in params.W], "seed": int(seed)})


def gen_sbm_sym(n: int, a: float, b: float, seed) -> LabeledGraph:
    """Two balanced communities, within/across edge probabilities a/n and b/n."""
    if a < 0 or b < 0 or n < 1 or a > n or b > n:
        raise InvalidParams("need a, b >= 0 and a/n, b/n <= 1")
    params = SbmParams(n, (0.5, 0.5), ((a / n, b / n), (b / n, a / n)))
    lg = gen_sbm_general(params, seed)
    return LabeledGraph(lg.graph, lg.labels, 2,
                        {"model": "sbm_sym", "n": n, "a": a, "b": b, "seed": int(seed)})


def gen_er(n: int, d: float, seed) -> Graph:
    """Erdos-Renyi graph with edge probability d/n.

    Uses the same candidate stream as :func:`gen_sbm_general`, so
    ``gen_sbm_sym(n, a, a, s).graph == gen_er(n, a, s)``.
    """
    if n < 1 or d < 0 or d > n:
        raise InvalidParams("need 0 <= d <= n")
    _, cand_rng, _ = _streams(seed, 3)
    idx = _skip_sample(_pair_count(n), d / n, cand_rng)
    i, j = _decode_pairs(n, idx)
    return _from_pairs(n, i, j)


def _gbm_locations(labels0, s, rng):
    n = len(labels0)
    loc = rng.standard_normal((n, 2))
    # label 1 (index 0) is centred at -s/2, label 2 at +s/2
    loc[:, 0] += np.where(labels0 == 0, -s / 2, s / 2)
    return loc


def gbm_edges_from_locations(locations: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """All pairs at Euclidean distance ``<= radius``, sorted lexicographically."""
    if radius <= 0 or len(locations) < 2:
        # a tie at distance exactly 0 has probability zero
        e = np.zeros(0, dtype=np.int64)
        return e, e
    pairs = cKDTree(locations).query_pairs(radius, output_type="ndarray")
    if not len(pairs):
        e = np.zeros(0, dtype=np.int64)
        return e, e
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    pairs = pairs[order]
    return pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64)


def gen_gbm(params: GbmParams, seed) -> LabeledGraph:
    """Gaussian-mixture block model; locations are kept in ``meta['locations']``."""
    lab_rng, loc_rng = _streams(seed, 2)
    n = params.n
    labels0 = lab_rng.integers(0, 2, size=n)
    loc = _gbm_locations(labels0, params.s, loc_rng)
    i, j = gbm_edges_from_locations(loc, params.t / np.sqrt(n))
    g = _from_pairs(n, i, j)
    return LabeledGraph(g, labels0 + 1, 2,
                        {"model": "gbm", "n": n, "s": params.s, "t": params.t,
                         "seed": int(seed), "locations": loc})


def gen_hbm(params: HbmParams, seed) -> LabeledGraph:
    """Hybrid block model: thinned SBM edges united with thinned GBM edges."""
    lab_rng, cand_rng, thin_rng, loc_rng, keep_rng = _streams(seed, 5)
    n = params.n
    labels0 = lab_rng.integers(0, 2, size=n)
    a, b = params.a / n, params.b / n
    i1, j1 = _sample_sbm_edges(n, labels0, [[a, b], [b, a]], cand_rng, thin_rng)
    loc = _gbm_locations(labels0, params.s, loc_rng)
    i2, j2 = gbm_edges_from_locations(loc, params.t / np.sqrt(n))
    k1 = keep_rng.random(len(i1)) < params.h1
    k2 = keep_rng.random(len(i2)) < params.h2
    key = np.concatenate([i1[k1] * n + j1[k1], i2[k2] * n + j2[k2]])
    key = np.unique(key)
    g = _from_pairs(n, key // n, key % n)
    return LabeledGraph(g, labels0 + 1, 2,
                        {"model": "hbm", "n": n, "a": params.a, "b": params.b,
                         "s": params.s, "t": params.t, "h1": params.h1, "h2": params.h2,
                         "seed": int(seed), "locations": loc})


def gen_random_regular(n: int, d: int, seed) -> Graph:
    """Uniform d-regular simple graph by configuration-model rejection."""
    if (n * d) % 2:
        raise ParityError("n * d must be even")
    if not 0 <= d < n:
        raise InvalidParams("need 0 <= d < n")
    (rng,) = _streams(seed, 1)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(MAX_REGULAR_RETRIES):
        perm = rng.permutation(stubs).reshape(-1, 2)
        u, v = perm.min(axis=1), perm.max(axis=1)
        if (u == v).any():
            continue
        key = u * n + v
        if len(np.unique(key)) != len(key):
            continue
        return _from_pairs(n, u, v)
    raise RetriesExhausted(f"no simple {d}-regular graph on {n} vertices after "
                           f"{MAX_REGULAR_RETRIES} attempts")


# -- fixed graphs ----------------------------------------------------------

def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    """Center 0 joined to ``leaves`` vertices."""
    return build_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(10, outer + spokes + inner)


def heawood_graph() -> Graph:
    """3-regular, girth 6, 14 vertices (LCF notation [5, -5]^7)."""
    edges = {tuple(sorted((i, (i + 1) % 14))) for i in range(14)}
    for i in range(14):
        j = (i + (5 if i % 2 == 0 else -5)) % 14
        edges.add(tuple(sorted((i, j))))
    return build_graph(14, sorted(edges))


def lollipop_graph(clique: int, tail: int) -> Graph:
    """K_clique with a pendant path of ``tail`` extra vertices hung off vertex 0."""
    edges = [(i, j) for i in range(clique) for j in range(i + 1, clique)]
    prev = 0
    for v in range(clique, clique + tail):
        edges.append((prev, v))
        prev = v
    return build_graph(clique + tail, edges)


def tadpole_graph() -> Graph:
    """Pendant u=0 on vertex a=1 of the 4-cycle a=1, b=2, c=3, d=4."""
    return build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 1)])


def two_cliques_bridge(size: int) -> LabeledGraph:
    """Two disjoint K_size joined by a single edge, labelled by clique."""
    edges = []
    for off in (0, size):
        edges += [(off + i, off + j) for i in range(size) for j in range(i + 1, size)]
    edges.append((size - 1, size))
    labels = np.repeat([1, 2], size)
    return LabeledGraph(build_graph(2 * size, edges), labels, 2, {"model": "two_cliques"})


def random_tree(n: int, seed) -> Graph:
    """Uniform random labelled tree via a random Pruefer sequence."""
    if n <= 1:
        return build_graph(max(n, 0), [])
    if n == 2:
        return build_graph(2, [(0, 1)])
    (rng,) = _streams(seed, 1)
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return build_graph(n, edges)
