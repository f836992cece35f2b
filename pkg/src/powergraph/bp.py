"""Belief propagation for the block model and its linearizations.

Conventions
-----------
* Directed edges use the CSR indexing of :class:`~powergraph.operators.DirectedEdgeSpace`.
  The edge belief ``q[(v, v')]`` is the belief about ``v'`` ignoring ``v``.
* ``t`` counts rounds: the edge update runs for ``0 < t' < t`` and the vertex
  beliefs at round ``t`` are aggregated from the edge beliefs of round ``t - 1``.
  With ``t = 1`` vertex beliefs come straight from ``q0``.
* Products of factors are accumulated as sums of logs plus a count of exact
  zeros, so that excluded terms can be divided out without 0/0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from powergraph.errors import (
    DimensionMismatch,
    InvalidParams,
    TooLarge,
    ZeroNormalizer,
)
from powergraph.graph import Graph, _ranges
from powergraph.operators import DirectedEdgeSpace

PATH_BP_GUARD = 10**7


@dataclass(frozen=True)
class ModelParams:
    """Prior ``p``, connectivity ``Q`` (edge probability Q/n), degree ``d`` and ``n``."""

    p: np.ndarray
    Q: np.ndarray
    d: float | None = None
    n: int | None = None
    equal_degrees: bool = False

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        if p.ndim != 1 or Q.shape != (len(p), len(p)):
            raise DimensionMismatch("p must have length k and Q shape (k, k)")
        if (p < 0).any() or abs(p.sum() - 1) > 1e-9:
            raise InvalidParams("p must be a probability vector")
        if not np.allclose(Q, Q.T) or (Q < 0).any():
            raise InvalidParams("Q must be symmetric and nonnegative")
        Qp = Q @ p
        d = float(Qp.mean()) if self.d is None else float(self.d)
        if self.equal_degrees and np.abs(Qp - d).max() > 1e-9:
            raise InvalidParams("every entry of Q p must equal d")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "d", d)

    @property
    def k(self) -> int:
        return len(self.p)

    @property
    def PQ(self) -> np.ndarray:
        return np.diag(self.p) @ self.Q

    @classmethod
    def symmetric(cls, a: float, b: float, n: int | None = None) -> "ModelParams":
        return cls(np.array([0.5, 0.5]), np.array([[a, b], [b, a]]), (a + b) / 2, n,
                   equal_degrees=True)


@dataclass
class BeliefState:
    """Edge beliefs (2|E|, k) and vertex beliefs (n, k); either may be None.

    ``signed`` marks outputs of the linearized algorithms, whose entries may
    leave [0, 1].
    """

    edge: np.ndarray | None = None
    vertex: np.ndarray | None = None
    signed: bool = False

    def labels(self) -> np.ndarray:
        return np.argmax(self.vertex, axis=1) + 1


# -- log-space products ---------------------------------------------------------

def _log_factors(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split positive factors into (log, zero-indicator); negatives are an error."""
    if (x < 0).any():
        raise InvalidParams("negative factor in belief product")
    zero = x == 0
    return np.log(np.where(zero, 1.0, x)), zero.astype(np.int64)


def _normalize(logp: np.ndarray, zeros: np.ndarray) -> np.ndarray:
    """Rows of exp(logp) masked by ``zeros == 0``, normalized to sum 1."""
    live = zeros == 0
    if not live.any(axis=1).all():
        raise ZeroNormalizer("every community has a zero factor")
    shifted = np.where(live, logp, -np.inf)
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=1, keepdims=True)


def posterior_from_neighbors(params: ModelParams, neighbor_beliefs) -> np.ndarray:
    """p_i prod_j (Q q_j)_i, normalized. Exact rationals in give exact rationals out."""
    beliefs = list(neighbor_beliefs)
    if any(isinstance(x, Fraction) for x in np.ravel(params.p)) or any(
            isinstance(x, Fraction) for b in beliefs for x in b):
        return _posterior_exact(params, beliefs)
    logp = np.log(np.where(params.p > 0, params.p, 1.0))[None, :]
    zeros = (params.p == 0).astype(np.int64)[None, :]
    for b in beliefs:
        lf, zf = _log_factors(params.Q @ np.asarray(b, dtype=float))
        logp = logp + lf
        zeros = zeros + zf
    return _normalize(logp, zeros)[0]


def _posterior_exact(params, beliefs):
    p = [Fraction(x) for x in params.p]
    Q = [[Fraction(x) for x in row] for row in params.Q]
    k = len(p)
    num = list(p)
    for b in beliefs:
        b = [Fraction(x) for x in b]
        for i in range(k):
            num[i] *= sum(Q[i][j] * b[j] for j in range(k))
    z = sum(num)
    if z == 0:
        raise ZeroNormalizer("every community has a zero factor")
    return [x / z for x in num]


def posterior_from_neighbors_exact(p, Q, neighbor_beliefs) -> list[Fraction]:
    """Rational version of :func:`posterior_from_neighbors`."""
    params = ModelParams(np.asarray(p, dtype=float), np.asarray(Q, dtype=float))
    object.__setattr__(params, "p", np.array([Fraction(x) for x in p], dtype=object))
    object.__setattr__(params, "Q", np.array([[Fraction(x) for x in r] for r in Q], dtype=object))
    return _posterior_exact(params, neighbor_beliefs)


# -- BP and adjusted BP ---------------------------------------------------------------

def _check_edge_state(q, g, k, name="edge beliefs"):
    q = np.asarray(q, dtype=float)
    if q.shape != (len(g.indices), k):
        raise DimensionMismatch(f"{name} must have shape ({len(g.indices)}, {k})")
    return q


def _non_edge_logs(params, qv, adj, n):
    """Per vertex x: log prod over v'' not adjacent to x, v'' != x, of [1 - (Q q_v'')/n]."""
    lf, zf = _log_factors(1.0 - qv @ params.Q.T / n)
    tot_l, tot_z = lf.sum(axis=0), zf.sum(axis=0)
    return tot_l - lf - adj @ lf, tot_z - zf - adj @ zf


def _run_bp(t, q_edge, q_vertex, params: ModelParams, g: Graph, non_edge: bool) -> BeliefState:
    if t < 1:
        raise InvalidParams("t must be >= 1")
    des = DirectedEdgeSpace.of(g)
    n, k = g.n, params.k
    nn = params.n if params.n is not None else n
    logprior, zprior = _log_factors(params.p)
    adj = g.adjacency() if non_edge else None

    def vertex_logs(qe, qv):
        lf, zf = _log_factors(qe @ params.Q.T)
        S = np.zeros((n, k))
        Z = np.zeros((n, k), dtype=np.int64)
        np.add.at(S, des.tail, lf)
        np.add.at(Z, des.tail, zf)
        S += logprior
        Z += zprior
        if non_edge:
            nl, nz = _non_edge_logs(params, qv, adj, nn)
            S, Z = S + nl, Z + nz
        return S, Z, lf, zf

    qe, qv = q_edge, q_vertex
    for _ in range(1, t):
        S, Z, lf, zf = vertex_logs(qe, qv)
        # edge (v, v') collects everything at v' except the message from v
        h = des.head
        new_e = _normalize(S[h] - lf[des.rev], Z[h] - zf[des.rev])
        qv = _normalize(S, Z) if non_edge else qv
        qe = new_e
    S, Z, _, _ = vertex_logs(qe, qv)
    return BeliefState(qe, _normalize(S, Z))


def bp(t: int, q0, params: ModelParams, g: Graph) -> BeliefState:
    """Belief propagation without non-edge evidence. ``q0`` holds edge beliefs."""
    qe = q0.edge if isinstance(q0, BeliefState) else q0
    qe = _check_edge_state(qe, g, params.k)
    return _run_bp(t, qe, None, params, g, non_edge=False)


def adjusted_bp(t: int, q0: BeliefState, params: ModelParams, g: Graph,
                non_edge_factors: bool = True) -> BeliefState:
    """BP with the non-edge factors [1 - (Q q_v'')_i / n].

    The product over non-neighbours is the global product with the vertex itself
    and its neighbours divided out, O(n + m) per round.
    ``non_edge_factors=False`` drops the factors and reproduces :func:`bp`.
    """
    if params.n is not None and params.n != g.n:
        raise InvalidParams("params.n must equal g.n")
    qe = _check_edge_state(q0.edge, g, params.k)
    qv = np.asarray(q0.vertex, dtype=float)
    if qv.shape != (g.n, params.k):
        raise DimensionMismatch(f"vertex beliefs must have shape ({g.n}, {params.k})")
    return _run_bp(t, qe, qv, params, g, non_edge=non_edge_factors)


def non_edge_logs_naive(params: ModelParams, qv: np.ndarray, g: Graph) -> np.ndarray:
    """O(n^2) reference for the per-vertex non-edge log product."""
    n = g.n
    nn = params.n if params.n is not None else n
    out = np.zeros((n, params.k))
    for x in range(n):
        for y in range(n):
            if y != x and not g.has_edge(x, y):
                out[x] += np.log(1.0 - params.Q @ qv[y] / nn)
    return out


# -- path BP ---------------------------------------------------------------------------

def _paths_with_parents(g: Graph, length: int):
    """Simple paths with 0..length edges; parents[j][i] is the prefix of path i in level j."""
    levels = [np.arange(g.n, dtype=np.int64)[:, None]]
    parents = [None]
    for _ in range(length):
        paths = levels[-1]
        last = paths[:, -1]
        starts, ends = g.indptr[last], g.indptr[last + 1]
        rep = np.repeat(np.arange(len(paths)), ends - starts)
        nxt = g.indices[_ranges(starts, ends)]
        ext = paths[rep]
        fresh = (ext != nxt[:, None]).all(axis=1)
        levels.append(np.column_stack([ext[fresh], nxt[fresh]]))
        parents.append(rep[fresh])
    return levels, parents


def path_bp(t: int, q0, params: ModelParams, g: Graph) -> BeliefState:
    """Belief propagation with a separate belief for every simple path.

    ``q0`` gives beliefs on paths v_0..v_t about v_t: an (n, k) array of
    per-vertex beliefs (applied to the last vertex), a callable mapping a
    (P, t + 1) path array to (P, k) beliefs, or None for the prior.
    """
    if not 1 <= t <= 4:
        raise InvalidParams("path_bp supports 1 <= t <= 4")
    dmax = int(g.degrees().max()) if g.n else 0
    if g.n * float(dmax) ** t > PATH_BP_GUARD:
        raise TooLarge(f"path_bp: n * maxdeg^t exceeds {PATH_BP_GUARD:.0e}")
    levels, parents = _paths_with_parents(g, t)
    k = params.k
    top = levels[t]
    if q0 is None:
        q = np.tile(params.p, (len(top), 1))
    elif callable(q0):
        q = np.asarray(q0(top), dtype=float)
    else:
        q = np.asarray(q0, dtype=float)[top[:, -1]]
    logprior, zprior = _log_factors(params.p)
    for j in range(t - 1, -1, -1):
        # beliefs on level j+1 feed the paths of level j they extend
        lf, zf = _log_factors(q @ params.Q.T)
        m = len(levels[j])
        S = np.tile(logprior, (m, 1))
        Z = np.tile(zprior, (m, 1))
        np.add.at(S, parents[j + 1], lf)
        np.add.at(Z, parents[j + 1], zf)
        q = _normalize(S, Z)
    return BeliefState(None, q)


# -- linearized variants -----------------------------------------------------------------

def linearized_bp(t: int, q0, params: ModelParams, g: Graph) -> BeliefState:
    """eps <- sum over continuing edges of PQ eps / d; vertex q = p + sum PQ eps / d."""
    if t < 1:
        raise InvalidParams("t must be >= 1")
    qe = _check_edge_state(q0.edge if isinstance(q0, BeliefState) else q0, g, params.k)
    des = DirectedEdgeSpace.of(g)
    PQt = params.PQ.T / params.d
    eps = qe - params.p
    for _ in range(1, t):
        out = np.zeros((g.n, params.k))
        np.add.at(out, des.tail, eps)
        eps = (out[des.head] - eps[des.rev]) @ PQt
    out = np.zeros((g.n, params.k))
    np.add.at(out, des.tail, eps)
    return BeliefState(eps + params.p, params.p + out @ PQt, signed=True)


def _adjusted_linear_step(eps_e, eps_v, params, g, des, adj):
    n = params.n if params.n is not None else g.n
    out = np.zeros((g.n, params.k))
    np.add.at(out, des.tail, eps_e)
    non = eps_v.sum(axis=0) - eps_v - adj @ eps_v
    PQt = params.PQ.T
    new_e = (out[des.head] - eps_e[des.rev]) @ PQt / params.d - non[des.head] @ PQt / n
    new_v = out @ PQt / params.d - non @ PQt / n
    return new_e, new_v


def adjusted_linearized_trajectory(t: int, q0: BeliefState, params: ModelParams, g: Graph):
    """States (eps_e, eps_v) for t' = 0..t under the adjusted linearized update."""
    des = DirectedEdgeSpace.of(g)
    adj = g.adjacency()
    eps_e = _check_edge_state(q0.edge, g, params.k) - params.p
    eps_v = np.asarray(q0.vertex, dtype=float) - params.p
    traj = [(eps_e, eps_v)]
    for _ in range(t):
        eps_e, eps_v = _adjusted_linear_step(eps_e, eps_v, params, g, des, adj)
        traj.append((eps_e, eps_v))
    return traj


def adjusted_linearized_bp(t: int, q0: BeliefState, params: ModelParams, g: Graph) -> BeliefState:
    """Linearized BP with the non-edge correction; returns q = p + eps (signed)."""
    if t < 1:
        raise InvalidParams("t must be >= 1")
    traj = adjusted_linearized_trajectory(t, q0, params, g)
    eps_e, _ = traj[t - 1]
    return BeliefState(eps_e + params.p, traj[t][1] + params.p, signed=True)


def adjusted_nonbacktracking_naive(g: Graph, d: float, n_norm: float | None = None) -> np.ndarray:
    """Dense B-hat built entry by entry from its defining sums (test oracle)."""
    des = DirectedEdgeSpace.of(g)
    n = g.n
    nn = n if n_norm is None else n_norm
    m2 = des.size
    B = np.zeros((m2 + n, m2 + n))
    for e in range(m2):
        v, vp = des.tail[e], des.head[e]
        for f in range(m2):
            if des.tail[f] == vp and des.head[f] != v:
                B[e, f] += 1.0 / d
        for x in range(n):
            if x != vp and not g.has_edge(vp, x):
                B[e, m2 + x] -= 1.0 / nn
    for v in range(n):
        for f in range(m2):
            if des.tail[f] == v:
                B[m2 + v, f] += 1.0 / d
        for x in range(n):
            if x != v and not g.has_edge(v, x):
                B[m2 + v, m2 + x] -= 1.0 / nn
    return B


def verify_tensor_identity(t: int, eps0: BeliefState, params: ModelParams, g: Graph,
                           tol: float = 1e-10) -> tuple[bool, float]:
    """Compare eps^(t) from the adjusted linearized recursion against (B-hat kron PQ)^t eps^(0).

    ``eps0`` holds deviations from the prior (edge and vertex parts). The second
    route builds B-hat entry by entry and applies the Kronecker product densely.
    """
    q0 = BeliefState(np.asarray(eps0.edge) + params.p, np.asarray(eps0.vertex) + params.p)
    eps_e, eps_v = adjusted_linearized_trajectory(t, q0, params, g)[t]
    route1 = np.vstack([eps_e, eps_v]).ravel()

    B = adjusted_nonbacktracking_naive(g, params.d, params.n)
    K = np.kron(B, params.PQ)
    x = np.vstack([np.asarray(eps0.edge, dtype=float), np.asarray(eps0.vertex, dtype=float)]).ravel()
    for _ in range(t):
        x = K @ x
    dev = float(np.max(np.abs(route1 - x))) if len(x) else 0.0
    return dev <= tol, dev


# -- initializers --------------------------------------------------------------------------

def prior_init(params: ModelParams, g: Graph) -> BeliefState:
    return BeliefState(np.tile(params.p, (len(g.indices), 1)), np.tile(params.p, (g.n, 1)))


def random_init(params: ModelParams, g: Graph, seed, delta: float = 0.05) -> BeliefState:
    """Prior plus a seeded zero-sum perturbation per vertex, shared by edges into it."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((g.n, params.k))
    z -= z.mean(axis=1, keepdims=True)
    z /= np.maximum(np.abs(z).max(axis=1, keepdims=True), 1e-12)
    qv = params.p + delta * z * np.minimum(params.p, 1 - params.p).min()
    return BeliefState(qv[g.indices], qv)


def high_degree_init(params: ModelParams, g: Graph) -> BeliefState:
    """Bias the sqrt(n) highest-degree vertices towards community 1 by 1/(4 pi^2 n)^(1/4)."""
    if params.k != 2:
        raise InvalidParams("high-degree initialization is defined for k = 2")
    n = g.n
    bias = (4 * np.pi**2 * n) ** -0.25
    top = np.argsort(-g.degrees(), kind="stable")[: int(np.sqrt(n))]
    qv = np.tile(params.p, (n, 1))
    qv[top] = params.p + np.array([bias, -bias])
    return BeliefState(qv[g.indices], qv)


def initial_beliefs(kind: str, params: ModelParams, g: Graph, seed=0) -> BeliefState:
    if kind == "prior":
        return prior_init(params, g)
    if kind == "random":
        return random_init(params, g, seed)
    if kind == "high-degree":
        return high_degree_init(params, g)
    raise InvalidParams(f"unknown initializer {kind!r}")
