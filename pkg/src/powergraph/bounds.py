"""Alon-Boppana quantities for powered graphs, computed exactly where possible.

Walk counts and the regular-graph recursion use integer arithmetic (int64
when a degree bound proves it cannot overflow, Python integers otherwise).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
import scipy.sparse as sp

from powergraph.errors import (
    GirthTooSmall,
    InvalidParams,
    InvalidR,
    NoEdges,
    NotRegular,
    PreconditionViolated,
    TooLarge,
)
from powergraph.graph import Graph, diameter, girth, is_connected
from powergraph.operators import distance_matrix, powered_adjacency

T2K_DENSE_LIMIT = 5000
LAMBDA_DENSE_LIMIT = 2000
LAMBDA_SLACK = 1e-8
INT64_SAFE = 2**62
EVEN_PARTITION_GUARD = 10**6


@dataclass
class AbReport:
    r: int
    k: int
    delta: list = field(default_factory=list)
    dhat: float = 0.0
    lower_bound: float = 0.0
    lambda2: float = 0.0
    lambda_rest: float = 0.0
    t2k: int = 0
    inequality_holds: bool = False
    rest_holds: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t2k"] = str(self.t2k) if self.t2k > INT64_SAFE else int(self.t2k)
        return d


def _check_r(r, minimum=1):
    if int(r) != r or r < minimum:
        raise InvalidR(f"r must be an integer >= {minimum}")


# -- modified minimum degrees ---------------------------------------------------------

def delta_i(g: Graph, i: int) -> int:
    """min over ordered edges (x, y) of |{v : d(x, v) = i, d(y, v) >= i}|.

    Since |d(x, v) - d(y, v)| <= 1 on an edge, the set is the distance-i sphere
    of x minus the distance-(i-1) sphere of y, so the count is
    |S_i(x)| - |S_i(x) & S_{i-1}(y)|.
    """
    if g.m == 0:
        raise NoEdges("delta_i needs at least one edge")
    if int(i) != i or i < 0:
        raise InvalidParams("i must be a nonnegative integer")
    if i == 0:
        return 1
    Si = distance_matrix(g, i)
    Sprev = distance_matrix(g, i - 1)
    size = np.asarray(Si.sum(axis=1)).ravel()
    overlap = (Si @ Sprev.T).multiply(g.adjacency()).tocsr()
    x = np.repeat(np.arange(g.n), g.degrees())
    y = g.indices
    ov = np.asarray(overlap[x, y]).ravel()
    return int((size[x] - ov).min())


def delta_profile(g: Graph, r: int) -> list[int]:
    return [delta_i(g, i) for i in range(r + 1)]


def _integer_root(value: int, r: int) -> int | None:
    root = round(value ** (1.0 / r))
    for c in (root - 1, root, root + 1):
        if c >= 0 and c**r == value:
            return c
    return None


def dhat_from_delta(delta: list[int]) -> float:
    r = len(delta) - 1
    prods = [delta[i] * delta[r - i] for i in range(r + 1)]
    if len(set(prods)) == 1:
        # common product P: the mean of sqrt(P) is sqrt(P), so dhat = P^(1/r)
        root = _integer_root(prods[0], r)
        if root is not None:
            return float(root)
        return prods[0] ** (1.0 / r)
    s = sum(math.sqrt(p) for p in prods)
    return (s / (r + 1)) ** (2.0 / r)


def dhat_r(g: Graph, r: int) -> float:
    _check_r(r)
    return dhat_from_delta(delta_profile(g, r))


def ab_lower_bound(g: Graph, r: int) -> float:
    """(r + 1) dhat_r^(r/2), with no asymptotic correction applied."""
    _check_r(r)
    return (r + 1) * dhat_r(g, r) ** (r / 2)


# -- closed walks -----------------------------------------------------------------------

def _int_power_diag_min(M: sp.csr_matrix, k: int) -> int:
    """min_v (M^(2k))_vv = min_v sum_u (M^k)_{uv}^2 for symmetric 0/1 M, exactly."""
    n = M.shape[0]
    if k == 0:
        return 1
    dmax = int(M.sum(axis=1).max()) if n else 0
    if float(dmax) ** (2 * k) < INT64_SAFE:
        P = sp.csr_matrix(M, dtype=np.int64)
        acc = P
        for _ in range(k - 1):
            acc = (acc @ P).tocsr()
        sq = acc.multiply(acc)
        return int(np.asarray(sq.sum(axis=0)).ravel().min())
    dense = np.asarray(M.todense(), dtype=np.int64).astype(object)
    acc = dense
    for _ in range(k - 1):
        acc = acc.dot(dense)
    return int(min((acc * acc).sum(axis=0)))


def t2k(g: Graph, r: int, k: int) -> int:
    """Minimum over vertices of closed walks of length 2k in G^(r), exactly."""
    _check_r(r)
    if int(k) != k or k < 0:
        raise InvalidParams("k must be a nonnegative integer")
    if g.n > T2K_DENSE_LIMIT:
        raise TooLarge(f"t2k limited to n <= {T2K_DENSE_LIMIT}")
    if g.n == 0:
        raise InvalidParams("empty graph")
    return _int_power_diag_min(powered_adjacency(g, r), int(k))


def _spectrum_top(M: sp.csr_matrix) -> tuple[float, float]:
    """(second largest algebraic eigenvalue, max |lambda_i| over i >= 2)."""
    n = M.shape[0]
    if n < 2:
        return 0.0, 0.0
    if n <= LAMBDA_DENSE_LIMIT:
        vals = np.linalg.eigvalsh(M.toarray())
    else:
        from scipy.sparse.linalg import eigsh
        v0 = np.random.default_rng(0).standard_normal(n)
        top = eigsh(M.astype(float), k=2, which="LA", tol=1e-10, v0=v0,
                    return_eigenvectors=False)
        bottom = eigsh(M.astype(float), k=1, which="SA", tol=1e-10, v0=v0,
                       return_eigenvectors=False)
        vals = np.sort(np.concatenate([top, bottom]))
    lam2 = float(vals[-2])
    rest = float(max(abs(vals[-2]), abs(vals[0])))
    return lam2, rest


def valid_ks(g: Graph, r: int) -> list[int]:
    """All k >= 0 with 2k < ceil(diam / r)."""
    bound = -(-diameter(g) // r)
    return [k for k in range(0, bound) if 2 * k < bound]


def check_lambda_inequality(g: Graph, r: int, k: int, with_delta: bool = True,
                            _spectrum=None) -> AbReport:
    """lambda_2(G^(r))^(2k) >= t_2k for 2k < ceil(diam / r).

    lambda_2 is the second largest algebraic eigenvalue of the adjacency of
    the simple graph G^(r) and decides ``inequality_holds``. The Rayleigh
    quotient argument bounds the second largest eigenvalue of (A^(r))^(2k),
    i.e. ``lambda_rest = max |lambda_i|, i >= 2``; ``rest_holds`` checks that
    form, which can hold where the algebraic one fails (the path P4, r = k = 1).
    """
    _check_r(r)
    if not is_connected(g):
        raise PreconditionViolated("graph must be connected")
    D = diameter(g)
    if not (int(k) == k and 0 <= k and 2 * k < -(-D // r)):
        raise PreconditionViolated(f"need 2k < ceil(D/r) = {-(-D // r)}, got k={k}")
    M = powered_adjacency(g, r)
    lam2, rest = _spectrum if _spectrum is not None else _spectrum_top(M)
    walks = _int_power_diag_min(M, int(k)) if g.n <= T2K_DENSE_LIMIT else None
    if walks is None:
        raise TooLarge(f"t2k limited to n <= {T2K_DENSE_LIMIT}")
    target = float(walks) * (1 - LAMBDA_SLACK)
    holds = abs(lam2) ** (2 * k) >= target
    rep = AbReport(r=int(r), k=int(k), lambda2=lam2, lambda_rest=rest, t2k=walks,
                   inequality_holds=bool(holds), rest_holds=bool(rest ** (2 * k) >= target))
    if with_delta and g.m:
        rep.delta = delta_profile(g, r)
        rep.dhat = dhat_from_delta(rep.delta)
        rep.lower_bound = (r + 1) * rep.dhat ** (r / 2)
    return rep


def check_all_k(g: Graph, r: int) -> list[AbReport]:
    """Reports for every valid k, sharing one eigen-decomposition."""
    spectrum = _spectrum_top(powered_adjacency(g, r))
    return [check_lambda_inequality(g, r, k, with_delta=False, _spectrum=spectrum)
            for k in valid_ks(g, r)]


# -- regular graphs ----------------------------------------------------------------------

def regular_power_recursion(g: Graph, r: int) -> sp.csr_matrix:
    """A^(r) = A A^(r-1) - (d-1) A^(r-2), A^(0) = I, A^(1) = A + I, in exact integers.

    Valid for d-regular graphs of girth > 2r, where it equals the adjacency
    of G^(r) plus I.
    """
    _check_r(r)
    deg = g.degrees()
    if g.n == 0 or deg.min() != deg.max():
        raise NotRegular("graph is not regular")
    d = int(deg[0])
    if not girth(g) > 2 * r:
        raise GirthTooSmall(f"girth {girth(g)} <= 2r = {2 * r}")
    A = g.adjacency(np.int64)
    eye = sp.identity(g.n, dtype=np.int64, format="csr")
    prev, cur = eye, (A + eye).tocsr()
    for _ in range(2, r + 1):
        prev, cur = cur, (A @ cur - (d - 1) * prev).tocsr()
    cur.eliminate_zeros()
    return cur


# -- even partitions ---------------------------------------------------------------------

def _even_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(0, total + 1, 2):
        for rest in _even_compositions(total - first, parts - 1):
            yield (first,) + rest


def even_partition_check(x, n2: int) -> tuple[Fraction, Fraction, bool]:
    """Sum over even compositions of multinomial(n2; m) prod x_i^m_i vs (sum x)^n2 / 2^(k-1).

    Inputs are converted to exact rationals, so both sides are exact.
    """
    if int(n2) != n2 or n2 < 0 or n2 % 2:
        raise InvalidParams("n2 must be a nonnegative even integer")
    xs = [Fraction(v) for v in x]
    if any(v < 0 for v in xs):
        raise InvalidParams("x must be nonnegative")
    k = len(xs)
    if k == 0:
        raise InvalidParams("x must be nonempty")
    if math.comb(n2 // 2 + k - 1, k - 1) > EVEN_PARTITION_GUARD:
        raise TooLarge("too many even compositions")
    lhs = Fraction(0)
    for comp in _even_compositions(int(n2), k):
        coef = math.factorial(n2)
        term = Fraction(1)
        for m, v in zip(comp, xs):
            coef //= math.factorial(m)
            term *= v**m
        lhs += coef * term
    rhs = sum(xs, Fraction(0)) ** n2 / 2 ** (k - 1)
    return lhs, rhs, lhs >= rhs


def sign_vector_identity(x, n2: int) -> Fraction:
    """sum over j in {-1, 1}^k of (j . x)^n2 divided by 2^k (equals the even-composition sum)."""
    xs = [Fraction(v) for v in x]
    total = Fraction(0)
    for signs in product((-1, 1), repeat=len(xs)):
        total += sum(s * v for s, v in zip(signs, xs)) ** n2
    return total / 2 ** len(xs)
