import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import to_nx
from powergraph.errors import InvalidParams, ParityError
from powergraph.generators import (
    GbmParams,
    HbmParams,
    SbmParams,
    _decode_pairs,
    _skip_sample,
    derive_seed,
    gbm_edges_from_locations,
    gen_er,
    gen_gbm,
    gen_hbm,
    gen_random_regular,
    gen_sbm_general,
    gen_sbm_sym,
    random_tree,
    sbm_rates_for_snr,
    snr,
)


def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed("a", 1) == derive_seed("a", 1)
    assert derive_seed("a", 1) != derive_seed("a", 2)
    assert derive_seed(1, "a") != derive_seed("a", 1)
    assert 0 <= derive_seed("x") < 2**63


@given(st.integers(2, 60), st.data())
def test_decode_pairs_is_lexicographic(n, data):
    total = n * (n - 1) // 2
    idx = np.array(data.draw(st.lists(st.integers(0, total - 1), min_size=1, max_size=20)))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    i, j = _decode_pairs(n, idx)
    assert list(zip(i.tolist(), j.tolist())) == [pairs[k] for k in idx]


def test_decode_pairs_large_n_exact_at_row_boundaries():
    n = 10**6
    rows = np.array([0, 1, 499_999, n - 2])
    offset = rows * (2 * n - rows - 1) // 2
    for delta in (0, -1):
        i, j = _decode_pairs(n, offset + delta)
        expect_i = rows if delta == 0 else rows - 1
        ok = offset + delta >= 0
        assert (i[ok] == expect_i[ok]).all()


def test_skip_sample_rate():
    rng = np.random.default_rng(0)
    idx = _skip_sample(10**6, 0.01, rng)
    assert np.all(np.diff(idx) > 0) and idx[-1] < 10**6
    assert abs(len(idx) - 10**4) < 5 * 100


def test_sbm_reproducible_and_seed_sensitive():
    a = gen_sbm_sym(500, 5, 1, 3)
    b = gen_sbm_sym(500, 5, 1, 3)
    c = gen_sbm_sym(500, 5, 1, 4)
    assert a.graph == b.graph and (a.labels == b.labels).all()
    assert a.graph != c.graph


def test_sbm_edge_rates():
    n, a, b = 20000, 6.0, 1.0
    lg = gen_sbm_sym(n, a, b, 11)
    e = lg.graph.edges()
    same = lg.labels[e[:, 0]] == lg.labels[e[:, 1]]
    n1 = (lg.labels == 1).sum()
    n2 = n - n1
    within = (n1 * (n1 - 1) + n2 * (n2 - 1)) / 2
    across = n1 * n2
    assert same.sum() / within == pytest.approx(a / n, rel=0.05)
    assert (~same).sum() / across == pytest.approx(b / n, rel=0.1)
    assert abs(n1 - n / 2) < 4 * np.sqrt(n) / 2


def test_sbm_with_equal_rates_is_er():
    assert gen_sbm_sym(800, 3, 3, 5).graph == gen_er(800, 3, 5)


def test_sbm_general_three_communities():
    p = (0.2, 0.3, 0.5)
    W = ((0.05, 0.0, 0.0), (0.0, 0.05, 0.0), (0.0, 0.0, 0.05))
    lg = gen_sbm_general(SbmParams(600, p, W), 1)
    e = lg.graph.edges()
    assert (lg.labels[e[:, 0]] == lg.labels[e[:, 1]]).all()
    assert set(np.unique(lg.labels)) == {1, 2, 3}


@pytest.mark.parametrize("kwargs", [
    dict(n=5, p=(0.5, 0.6), W=((0, 0), (0, 0))),
    dict(n=5, p=(0.5, 0.5), W=((0, 0.1), (0.2, 0))),
    dict(n=5, p=(0.5, 0.5), W=((0, 0, 0), (0, 0, 0))),
])
def test_sbm_params_validation(kwargs):
    with pytest.raises(InvalidParams):
        SbmParams(**kwargs)


def test_snr_rates_roundtrip():
    a, b = sbm_rates_for_snr(0.5, 3.5)
    assert snr(a, b) == pytest.approx(0.5)
    assert (a + b) / 2 == pytest.approx(3.5)
    assert snr(6, 1) == pytest.approx(25 / 14)


def test_gbm_edges_match_brute_force():
    rng = np.random.default_rng(2)
    loc = rng.standard_normal((300, 2))
    i, j = gbm_edges_from_locations(loc, 0.3)
    d = np.linalg.norm(loc[:, None] - loc[None], axis=2)
    iu, ju = np.nonzero(np.triu(d <= 0.3, 1))
    assert list(zip(i, j)) == list(zip(iu, ju))


def test_gbm_locations_and_labels():
    lg = gen_gbm(GbmParams(4000, 2.0, 5.0), 0)
    loc = lg.meta["locations"]
    assert loc[lg.labels == 1, 0].mean() == pytest.approx(-1.0, abs=0.1)
    assert loc[lg.labels == 2, 0].mean() == pytest.approx(1.0, abs=0.1)
    assert loc[:, 1].mean() == pytest.approx(0.0, abs=0.1)
    e = lg.graph.edges()
    dist = np.linalg.norm(loc[e[:, 0]] - loc[e[:, 1]], axis=1)
    assert (dist <= 5.0 / np.sqrt(4000)).all()


def test_hbm_edges_come_from_either_source():
    params = HbmParams(2000, 2.5, 0.187, 1.0, 10.0, 0.5, 0.5)
    lg = gen_hbm(params, 7)
    full = gen_hbm(HbmParams(2000, 2.5, 0.187, 1.0, 10.0, 1.0, 1.0), 7)
    # thinning only removes edges from the un-thinned superposition
    assert lg.graph.edge_set() <= full.graph.edge_set()
    assert lg.graph.m < full.graph.m
    none = gen_hbm(HbmParams(2000, 2.5, 0.187, 1.0, 10.0, 0.0, 0.0), 7)
    assert none.graph.m == 0


def test_hbm_geometric_only_matches_gbm_radius():
    lg = gen_hbm(HbmParams(1500, 0.0, 0.0, 1.0, 4.0, 0.0, 1.0), 3)
    loc = lg.meta["locations"]
    i, j = gbm_edges_from_locations(loc, 4.0 / np.sqrt(1500))
    assert lg.graph.edge_set() == set(zip(i.tolist(), j.tolist()))


@pytest.mark.parametrize("n, d", [(10, 3), (100, 3), (50, 4)])
def test_random_regular(n, d):
    g = gen_random_regular(n, d, 1)
    assert (g.degrees() == d).all()


def test_random_regular_parity():
    with pytest.raises(ParityError):
        gen_random_regular(5, 3, 0)


@given(st.integers(1, 30), st.integers(0, 1000))
def test_random_tree_is_tree(n, seed):
    g = random_tree(n, seed)
    assert g.n == n and g.m == n - 1
    assert nx.is_tree(to_nx(g)) or n == 0


def test_random_regular_small_cases():
    from powergraph.generators import complete_graph
    assert gen_random_regular(4, 3, 0) == complete_graph(4)
    g = gen_random_regular(30, 2, 5)
    assert (g.degrees() == 2).all()
    assert all(len(c) >= 3 for c in nx.cycle_basis(to_nx(g)))


def test_random_regular_is_nearly_ramanujan():
    from powergraph.spectral import top_eigs_symmetric
    good = 0
    for s in range(50):
        g = gen_random_regular(1000, 3, derive_seed("friedman", s))
        lam2 = top_eigs_symmetric(g.adjacency(), 2, seed=s)[1].value
        good += lam2 <= 2 * np.sqrt(2) + 0.2
    assert good >= 45
