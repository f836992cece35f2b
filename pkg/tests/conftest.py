import networkx as nx
import numpy as np
from hypothesis import settings, strategies as st

from powergraph.graph import build_graph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def graphs(draw, min_n=1, max_n=12, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, keep in zip(pairs, mask) if keep]
    if connected:
        # a random spanning path guarantees connectivity
        order = draw(st.permutations(range(n)))
        extra = {tuple(sorted((order[i], order[i + 1]))) for i in range(n - 1)}
        edges = sorted(set(edges) | extra)
    return build_graph(n, edges)


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges().tolist())
    return h


def dense_adj(g):
    return g.adjacency().toarray()


def hop_distances(g):
    """All-pairs hop distances by Floyd-Warshall on the dense adjacency (inf if unreachable)."""
    A = dense_adj(g)
    D = np.where(A > 0, 1.0, np.inf)
    np.fill_diagonal(D, 0)
    for k in range(g.n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
