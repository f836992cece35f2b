import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from powergraph.errors import DimensionMismatch, EmptyCommunity, InvalidParams, KTooLarge, NotSymmetric
from powergraph.generators import complete_graph, cycle_graph, gen_er, gen_sbm_sym, two_cliques_bridge
from powergraph.graph import largest_component
from powergraph.operators import classical_operator, nonbacktracking, nonbacktracking_matrix
from powergraph.spectral import (
    METHODS,
    Partition,
    agreement,
    edge_sums,
    lower_median,
    round_median,
    round_sign,
    spectral_cluster,
    symmetry_defect,
    top_eigs_general,
    top_eigs_random_walk,
    top_eigs_symmetric,
)


def test_cycle_and_complete_spectra():
    vals = [p.value for p in top_eigs_symmetric(cycle_graph(4).adjacency(), 4)]
    assert np.allclose(vals, [2, 0, 0, -2])
    vals = [p.value for p in top_eigs_symmetric(complete_graph(30).adjacency(), 2)]
    assert np.allclose(vals, [29, -1])


@pytest.mark.parametrize("seed", range(4))
def test_symmetric_solver_matches_dense(seed):
    g, _ = largest_component(gen_er(400, 5, seed))
    A = g.adjacency()
    pairs = top_eigs_symmetric(A, 3, seed=seed)
    dense = np.sort(np.linalg.eigvalsh(A.toarray()))[::-1][:3]
    assert np.allclose([p.value for p in pairs], dense, atol=1e-8)
    for p in pairs:
        assert p.residual <= 1e-8 * max(1, abs(p.value))
        assert np.isclose(np.linalg.norm(p.vector), 1)


def test_smallest_algebraic():
    A = cycle_graph(9).adjacency()
    low = top_eigs_symmetric(A, 2, which="SA")
    expect = np.sort(np.linalg.eigvalsh(A.toarray()))[:2]
    assert np.allclose([p.value for p in low], expect)


def test_symmetry_probe():
    M = sp.random(50, 50, density=0.1, random_state=0, format="csr")
    assert symmetry_defect(M + M.T) < 1e-12
    with pytest.raises(NotSymmetric):
        top_eigs_symmetric(M, 2)


def test_random_walk_through_conjugate():
    g, _ = largest_component(gen_er(300, 4, 3))
    A = g.adjacency()
    pairs = top_eigs_random_walk(A, 2)
    P = (sp.diags(1 / g.degrees()) @ A).toarray()
    vals = np.sort(np.linalg.eigvals(P).real)[::-1]
    assert pairs[0].value == pytest.approx(1.0)
    assert pairs[1].value == pytest.approx(vals[1], abs=1e-8)
    for p in pairs:
        assert np.linalg.norm(P @ p.vector - p.value * p.vector) < 1e-7
    # the general entry point routes random walk operators the same way
    via = top_eigs_general(classical_operator(g, "random_walk"), 2)
    assert via[1].value == pytest.approx(pairs[1].value)


@pytest.mark.parametrize("seed", range(3))
def test_general_solver_nonbacktracking_matches_dense(seed):
    g, _ = largest_component(gen_er(120, 4, seed))
    pairs = top_eigs_general(nonbacktracking(g), 2, seed=seed)
    B = nonbacktracking_matrix(g).toarray()
    ev = np.linalg.eigvals(B)
    top = ev[np.argsort(-np.abs(ev))][0]
    assert pairs[0].value == pytest.approx(top.real, abs=1e-7)
    assert not pairs[0].complex_pair
    assert abs(pairs[1].value + 1j * pairs[1].imag) == pytest.approx(
        np.sort(np.abs(ev))[::-1][1], abs=1e-6)


def test_k_out_of_range():
    with pytest.raises(InvalidParams):
        top_eigs_symmetric(cycle_graph(5).adjacency(), 6)


def test_rounding_rules():
    assert round_sign([1.0, -1.0, 0.0]).labels.tolist() == [1, 2, 2]
    assert lower_median([4, 1, 3, 2]) == 2
    part = round_median([4, 1, 3, 2])
    assert part.labels.tolist() == [1, 2, 1, 2]
    assert round_median([1.0, 1.0, 1.0]).degenerate


def test_edge_sums_dimension():
    g = cycle_graph(5)
    assert np.allclose(edge_sums(np.ones(10), g), 2)
    with pytest.raises(DimensionMismatch):
        edge_sums(np.ones(9), g)


@given(st.lists(st.integers(1, 3), min_size=3, max_size=40), st.permutations([1, 2, 3]))
def test_agreement_invariant_under_relabeling(truth, perm):
    truth = np.array(truth)
    if len(set(truth.tolist())) < 3:
        with pytest.raises(EmptyCommunity):
            agreement(truth, truth, k=3)
        return
    relabeled = np.array(perm)[truth - 1]
    assert agreement(truth, relabeled) == pytest.approx(1.0)


@given(st.lists(st.integers(1, 2), min_size=2, max_size=40),
       st.lists(st.integers(1, 2), min_size=40, max_size=40))
def test_agreement_range_and_symmetry_of_swap(truth, guess):
    truth = np.array(truth)
    guess = np.array(guess[: len(truth)])
    if len(set(truth.tolist())) < 2:
        return
    a = agreement(truth, guess, k=2)
    assert 0.5 <= a <= 1.0
    assert a == pytest.approx(agreement(truth, 3 - guess, k=2))


def test_agreement_balanced_not_raw_accuracy():
    truth = np.array([1] * 9 + [2])
    guess = np.ones(10, dtype=int)
    assert agreement(truth, guess) == pytest.approx(0.5)


def test_agreement_k_limit():
    with pytest.raises(KTooLarge):
        agreement(np.arange(1, 10), np.arange(1, 10))


def test_partition_label_range():
    with pytest.raises(InvalidParams):
        Partition([0, 1])


@pytest.mark.parametrize("method", [m for m in METHODS if m not in ("meta", "distance_matrix")])
def test_methods_separate_two_cliques(method):
    lg = two_cliques_bridge(10)
    part = spectral_cluster(lg.graph, method, r=1 if method.startswith("powered") else 2)
    assert agreement(lg.labels, part) == pytest.approx(1.0)
    assert len(part.info["eigenvalues"]) == 2


def test_unknown_method():
    with pytest.raises(InvalidParams):
        spectral_cluster(cycle_graph(5), "nope")


def test_powered_adjacency_recovers_sbm():
    lg = gen_sbm_sym(3000, 8, 1, 5)
    g, ids = largest_component(lg.graph)
    part = spectral_cluster(g, "powered_adjacency", r=2)
    assert agreement(lg.labels[ids], part) > 0.75


@pytest.mark.parametrize("seed", range(3))
def test_symmetric_vectors_orthogonal_and_dense_equivalent(seed):
    g, _ = largest_component(gen_er(200, 6, 10 + seed))
    for M in (g.adjacency(), classical_operator(g, "laplacian").matrix):
        pairs = top_eigs_symmetric(M, 3, seed=seed)
        V = np.column_stack([p.vector for p in pairs])
        off = V.T @ V - np.eye(3)
        assert np.abs(off).max() <= 1e-8
        dense = np.sort(np.linalg.eigvalsh(M.toarray()))[::-1][:3]
        assert np.allclose([p.value for p in pairs], dense, rtol=1e-6, atol=1e-9)


@given(st.lists(st.floats(-10, 10, allow_nan=False).filter(lambda x: abs(x) > 1e-9),
                min_size=2, max_size=30), st.floats(0.1, 100))
def test_sign_rounding_scale_and_flip(vec, scale):
    vec = np.array(vec)
    a = round_sign(vec)
    assert (round_sign(scale * vec).labels == a.labels).all()
    assert (round_sign(-vec).labels == 3 - a.labels).all()
    truth = np.arange(len(vec)) % 2 + 1
    assert agreement(truth, a) == pytest.approx(agreement(truth, round_sign(-vec)))


def test_random_guess_agreement_near_half():
    vals = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        truth = rng.integers(1, 3, 10000)
        vals.append(agreement(truth, rng.integers(1, 3, 10000)))
    assert abs(np.mean(vals) - 0.5) <= 0.02
