"""Eigensolvers, rounding rules and the agreement metric.

The Lanczos/Arnoldi iterations are delegated to ARPACK through
``scipy.sparse.linalg`` with a seeded starting vector; this module adds the
symmetry probe, residual contract, ordering conventions and the
D^{-1}A symmetrization.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs, eigsh

from powergraph.errors import (
    DimensionMismatch,
    EmptyCommunity,
    InvalidParams,
    KTooLarge,
    MaxIterations,
    NonConvergentComplexPair,
    NotSymmetric,
)
from powergraph.graph import Graph
from powergraph import operators as ops

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 5000
SYMMETRY_PROBE_TOL = 1e-8

METHODS = ("adjacency", "laplacian", "normalized_laplacian", "random_walk",
           "nonbacktracking", "powered_adjacency", "powered_nonbacktracking",
           "distance_matrix", "meta")
EDGE_SPACE_METHODS = ("nonbacktracking", "powered_nonbacktracking")


@dataclass
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float
    complex_pair: bool = False
    imag: float = 0.0


@dataclass
class Partition:
    labels: np.ndarray
    k: int = 2
    degenerate: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.labels) and (self.labels.min() < 1 or self.labels.max() > self.k):
            raise InvalidParams(f"labels must lie in 1..{self.k}")

    def __len__(self):
        return len(self.labels)


# -- eigensolvers --------------------------------------------------------------

def _as_operator(op) -> LinearOperator:
    if isinstance(op, LinearOperator):
        return op
    if sp.issparse(op):
        return sp.csr_matrix(op, dtype=float)
    return np.asarray(op, dtype=float)


def _matvec(op, x):
    if isinstance(op, LinearOperator):
        return op.matvec(x)
    return op @ x


def symmetry_defect(op, seed: int = 0) -> float:
    """|<Mx, y> - <x, My>| for unit random x, y."""
    n = op.shape[0]
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    x /= np.linalg.norm(x)
    y /= np.linalg.norm(y)
    return float(abs(np.dot(_matvec(op, x), y) - np.dot(x, _matvec(op, y))))


def _residual(op, lam, x) -> float:
    return float(np.linalg.norm(_matvec(op, x) - lam * x))


def _start(n, seed):
    return np.random.default_rng(seed).standard_normal(n) + 1e-3


def _dense(op) -> np.ndarray:
    if isinstance(op, ops.GraphOperator):
        return op.to_dense()
    if isinstance(op, LinearOperator):
        return op.matmat(np.eye(op.shape[0]))
    if sp.issparse(op):
        return op.toarray()
    return np.asarray(op, dtype=float)


def _check_residuals(pairs, tol):
    for p in pairs:
        if p.residual > tol * max(1.0, abs(p.value)):
            raise MaxIterations(f"residual {p.residual:.3g} above tolerance for eigenvalue {p.value:.6g}")


def top_eigs_symmetric(op, k: int = 2, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, seed: int = 0,
                       which: str = "LA") -> list[EigenPair]:
    """Algebraically largest ``k`` eigenpairs (``which="SA"`` for smallest), in
    descending order (ascending for ``SA``)."""
    op = _as_operator(op)
    n = op.shape[0]
    if k < 1 or k > n:
        raise InvalidParams(f"k={k} must lie in 1..{n}")
    if symmetry_defect(op, seed) > SYMMETRY_PROBE_TOL * max(1.0, _scale(op, seed)):
        raise NotSymmetric("operator failed the symmetry probe")
    if k >= n - 1:
        vals, vecs = np.linalg.eigh(_dense(op))
    else:
        try:
            vals, vecs = eigsh(op, k=k, which=which, tol=tol / 100, maxiter=max_iter,
                               v0=_start(n, seed))
        except ArpackNoConvergence as exc:
            raise MaxIterations(str(exc)) from exc
    order = np.argsort(vals)
    if which == "LA":
        order = order[::-1]
    order = order[:k]
    pairs = []
    for i in order:
        x = vecs[:, i] / np.linalg.norm(vecs[:, i])
        pairs.append(EigenPair(float(vals[i]), x, _residual(op, vals[i], x)))
    _check_residuals(pairs, tol)
    return pairs


def _scale(op, seed) -> float:
    x = np.random.default_rng(seed + 1).standard_normal(op.shape[0])
    x /= np.linalg.norm(x)
    return float(np.linalg.norm(_matvec(op, x)))


def top_eigs_random_walk(adj, k: int = 2, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> list[EigenPair]:
    """Eigenpairs of D^{-1}A through the symmetric conjugate D^{-1/2} A D^{-1/2}.

    If y is an eigenvector of the conjugate, x = D^{-1/2} y is one of D^{-1}A.
    """
    adj = sp.csr_matrix(adj, dtype=float)
    deg = np.asarray(adj.sum(axis=1)).ravel()
    s = sp.diags(1 / np.sqrt(deg))
    sym = (s @ adj @ s).tocsr()
    rw = sp.diags(1 / deg) @ adj
    out = []
    for p in top_eigs_symmetric(sym, k, tol, max_iter, seed):
        x = p.vector / np.sqrt(deg)
        x /= np.linalg.norm(x)
        out.append(EigenPair(p.value, x, _residual(rw, p.value, x)))
    return out


def top_eigs_general(op, k: int = 2, tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER, seed: int = 0,
                     allow_complex: bool = True) -> list[EigenPair]:
    """Largest-magnitude ``k`` eigenpairs of a possibly nonsymmetric operator.

    Values are real parts; ``complex_pair`` marks |Im| / |lambda| > tol, in
    which case ``value`` keeps the real part and ``imag`` the imaginary part.
    A random-walk operator with known degrees is routed through the
    symmetric conjugate.
    """
    if isinstance(op, ops.GraphOperator) and op.name == "random_walk" and op.matrix is not None:
        adj = sp.diags(op.degrees) @ op.matrix
        return top_eigs_random_walk(adj, k, tol, max_iter, seed)
    op = _as_operator(op)
    n = op.shape[0]
    if k < 1 or k > n:
        raise InvalidParams(f"k={k} must lie in 1..{n}")
    if k >= n - 1:
        vals, vecs = np.linalg.eig(_dense(op))
    else:
        try:
            vals, vecs = eigs(op, k=k, which="LM", tol=tol / 100, maxiter=max_iter,
                              v0=_start(n, seed))
        except ArpackNoConvergence as exc:
            raise MaxIterations(str(exc)) from exc
    order = np.lexsort((-vals.real, -np.round(np.abs(vals), 10)))[:k]
    pairs = []
    for i in order:
        lam = vals[i]
        x = vecs[:, i]
        is_complex = abs(lam.imag) > tol * max(abs(lam), 1e-300)
        if not is_complex:
            # fix the phase so the real part carries the vector
            j = np.argmax(np.abs(x))
            x = (x * np.exp(-1j * np.angle(x[j]))).real
            lam = lam.real
        x = x / np.linalg.norm(x)
        res = float(np.linalg.norm(_matvec(op, x) - lam * x)) if not is_complex else \
            float(np.linalg.norm(_matvec(op, x.real) + 1j * _matvec(op, x.imag) - lam * x))
        if is_complex and not allow_complex:
            raise NonConvergentComplexPair(f"eigenvalue {lam} is complex")
        pairs.append(EigenPair(float(np.real(lam)), x.real if not is_complex else x, res,
                               complex_pair=bool(is_complex), imag=float(np.imag(lam))))
    _check_residuals(pairs, tol)
    return pairs


# -- rounding ------------------------------------------------------------------------

def round_sign(vec) -> Partition:
    vec = np.asarray(vec, dtype=float)
    labels = np.where(vec > 0, 1, 2)
    return Partition(labels, 2, degenerate=bool(len(vec) and np.all(labels == labels[0])))


def lower_median(vec) -> float:
    s = np.sort(np.asarray(vec, dtype=float))
    return float(s[(len(s) - 1) // 2])


def round_median(vec) -> Partition:
    vec = np.asarray(vec, dtype=float)
    if not len(vec):
        return Partition(vec.astype(np.int64), 2, degenerate=True)
    labels = np.where(vec > lower_median(vec), 1, 2)
    return Partition(labels, 2, degenerate=bool(np.all(labels == labels[0])))


def edge_sums(vec, g: Graph) -> np.ndarray:
    """Per-vertex sum of entries over directed edges ending at that vertex."""
    vec = np.asarray(vec, dtype=float)
    if len(vec) != len(g.indices):
        raise DimensionMismatch(f"expected {len(g.indices)} edge entries, got {len(vec)}")
    return np.bincount(g.indices, weights=vec, minlength=g.n)


def round_edge_sums(vec, g: Graph) -> Partition:
    return round_median(edge_sums(vec, g))


# -- agreement -------------------------------------------------------------------------

MAX_K = 8


def agreement(truth, guess, k: int | None = None) -> float:
    """Balanced accuracy maximized over relabelings of ``guess``."""
    t = np.asarray(getattr(truth, "labels", truth), dtype=np.int64)
    q = np.asarray(getattr(guess, "labels", guess), dtype=np.int64)
    if len(t) != len(q):
        raise DimensionMismatch("truth and guess differ in length")
    if k is None:
        k = max(getattr(truth, "k", 0) or 0, getattr(guess, "k", 0) or 0, int(t.max()), int(q.max()))
    if k > MAX_K:
        raise KTooLarge(f"k={k} exceeds {MAX_K}")
    conf = np.zeros((k, k))
    np.add.at(conf, (t - 1, q - 1), 1)
    sizes = conf.sum(axis=1)
    if np.any(sizes == 0):
        raise EmptyCommunity("every true community must be nonempty")
    frac = conf / sizes[:, None]
    best = 0.0
    for perm in itertools.permutations(range(k)):
        # perm[i] is the guess label mapped to true label i
        best = max(best, float(frac[np.arange(k), list(perm)].sum() / k))
    return best


# -- dispatcher ------------------------------------------------------------------------

def spectral_cluster(g: Graph, method: str, r: int = 2, seed: int = 0,
                     tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     psi_params=None, guard: bool = True) -> Partition:
    """Second-eigenvector clustering with the rounding matching the operator's space.

    Eigenvalues and residuals of the solve are stored in ``partition.info``.
    """
    if method not in METHODS:
        raise InvalidParams(f"unknown method {method!r}")
    if g.n == 0:
        raise InvalidParams("graph is empty")
    if method == "meta":
        from powergraph.pipeline import PsiParams, meta_cluster
        return meta_cluster(g, psi_params or PsiParams(r_override=r), seed=seed, tol=tol,
                            max_iter=max_iter)

    if method == "adjacency":
        pairs = top_eigs_symmetric(g.adjacency(), 2, tol, max_iter, seed)
    elif method == "powered_adjacency":
        pairs = top_eigs_symmetric(ops.powered_adjacency(g, r), 2, tol, max_iter, seed)
    elif method == "distance_matrix":
        pairs = top_eigs_symmetric(ops.distance_matrix(g, r), 2, tol, max_iter, seed)
    elif method == "laplacian":
        # second smallest of L = second largest of (2 dmax) I - L
        shift = 2.0 * max(1, int(g.degrees().max()))
        L = ops.classical_operator(g, "laplacian").matrix
        pairs = top_eigs_symmetric(shift * sp.identity(g.n) - L, 2, tol, max_iter, seed)
        pairs = [EigenPair(shift - p.value, p.vector, p.residual) for p in pairs]
    elif method == "normalized_laplacian":
        Ln = ops.classical_operator(g, "normalized_laplacian").matrix
        pairs = top_eigs_symmetric(2.0 * sp.identity(g.n) - Ln, 2, tol, max_iter, seed)
        pairs = [EigenPair(2.0 - p.value, p.vector, p.residual) for p in pairs]
    elif method == "random_walk":
        ops.classical_operator(g, "random_walk")  # degree check
        pairs = top_eigs_random_walk(g.adjacency(), 2, tol, max_iter, seed)
    elif method == "nonbacktracking":
        pairs = top_eigs_general(ops.nonbacktracking(g), 2, tol, max_iter, seed)
    else:
        pairs = top_eigs_general(ops.powered_nonbacktracking(g, r, guard=guard), 2, tol,
                                 max_iter, seed)

    vec = np.real(pairs[1].vector)
    part = round_edge_sums(vec, g) if method in EDGE_SPACE_METHODS else round_sign(vec)
    part.info.update(eigenvalues=[p.value for p in pairs], residuals=[p.residual for p in pairs])
    return part
