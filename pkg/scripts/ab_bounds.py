"""Exact lambda_2 vs closed-walk checks and the modified-degree bound on a few graphs.

    python scripts/ab_bounds.py
"""
from powergraph.bounds import ab_lower_bound, check_all_k
from powergraph.generators import cycle_graph, gen_er, heawood_graph, path_graph, petersen_graph
from powergraph.graph import largest_component


def main():
    graphs = {"P30": path_graph(30), "C40": cycle_graph(40), "Petersen": petersen_graph(),
              "Heawood": heawood_graph(), "ER(500,3) giant": largest_component(gen_er(500, 3, 0))[0]}
    print(f"{'graph':<16} {'r':>2} {'k':>2} {'lambda2':>9} {'|lambda|':>9} {'t2k':>10} "
          f"{'holds':>5} {'AB bound':>9}")
    for name, g in graphs.items():
        for r in (1, 2):
            bound = ab_lower_bound(g, r)
            for rep in check_all_k(g, r):
                print(f"{name:<16} {r:>2} {rep.k:>2} {rep.lambda2:9.4f} {rep.lambda_rest:9.4f} "
                      f"{rep.t2k:>10} {str(rep.inequality_holds):>5} {bound:9.4f}")


if __name__ == "__main__":
    main()
