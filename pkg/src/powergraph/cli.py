"""Command-line interface: ``powergraph <subcommand> ...``.

Exit codes: 0 ok, 1 usage error, 2 runtime error, 3 failed verification.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from powergraph import bounds
from powergraph import bp as bpmod
from powergraph import operators as ops
from powergraph.errors import PowerGraphError
from powergraph.experiments import ExperimentConfig, determinism_hash, run_sweep, summarize
from powergraph.generators import (
    GbmParams,
    HbmParams,
    gen_er,
    gen_gbm,
    gen_hbm,
    gen_random_regular,
    gen_sbm_sym,
)
from powergraph.graph import (
    Graph,
    largest_component,
    read_edge_list,
    read_labels,
    write_edge_list,
    write_labels,
)
from powergraph.pipeline import PsiParams, choose_and_clean
from powergraph.spectral import METHODS, agreement, spectral_cluster

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=_json_default))


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


# -- subcommands -------------------------------------------------------------------

def cmd_generate(a):
    labels = None
    if a.model == "sbm":
        lg = gen_sbm_sym(a.n, a.a, a.b, a.seed)
    elif a.model == "gbm":
        lg = gen_gbm(GbmParams(a.n, a.s, a.t), a.seed)
    elif a.model == "hbm":
        lg = gen_hbm(HbmParams(a.n, a.a, a.b, a.s, a.t, a.h1, a.h2), a.seed)
    elif a.model == "er":
        lg = None
        g = gen_er(a.n, a.d, a.seed)
    else:
        lg = None
        g = gen_random_regular(a.n, int(a.d), a.seed)
    if lg is not None:
        g, labels = lg.graph, lg.labels
    write_edge_list(g, a.out)
    if labels is not None and a.labels:
        write_labels(labels, a.labels)
    _emit({"n": g.n, "m": g.m, "out": a.out, "labels": a.labels if labels is not None else None})


def cmd_power(a):
    g = read_edge_list(a.graph)
    guard = not a.guard_override
    if a.kind == "power":
        out = ops.graph_power(g, a.r)
    elif a.kind == "distance":
        out = Graph.from_csr(ops.distance_matrix(g, a.r))
    else:
        mat = ops.saw_matrix(g, a.r, guard=guard)
        out = Graph.from_csr(mat, weighted=True)
    write_edge_list(out, a.out)
    _emit({"n": out.n, "m": out.m, "kind": a.kind, "r": a.r, "out": a.out})


def cmd_clean(a):
    g = read_edge_list(a.graph)
    params = PsiParams(tau=a.tau, c=a.c, r_override=a.r)
    cleaned, rep = choose_and_clean(g, params)
    if a.out:
        write_edge_list(cleaned, a.out)
    if a.map_out:
        np.savetxt(a.map_out, rep.old_ids, fmt="%d")
    _emit(rep.to_dict())


def cmd_cluster(a):
    g = read_edge_list(a.graph)
    psi = PsiParams(tau=a.tau, c=a.c, r_override=a.r if a.method == "meta" else None)
    part = spectral_cluster(g, a.method, r=a.r or 2, seed=a.seed, tol=a.tol, psi_params=psi)
    if a.out:
        write_labels(part.labels, a.out)
    metrics = {"method": a.method, "degenerate": part.degenerate,
               "eigenvalues": part.info.get("eigenvalues", []),
               "residuals": part.info.get("residuals", [])}
    if "cleaning" in part.info:
        metrics["cleaning"] = part.info["cleaning"]
        metrics["r"] = part.info["r"]
    if a.labels:
        metrics["agreement"] = agreement(read_labels(a.labels), part)
    _emit(metrics)


def cmd_bp(a):
    g = read_edge_list(a.graph)
    params = bpmod.ModelParams.symmetric(a.a, a.b, n=g.n)
    q0 = bpmod.initial_beliefs(a.init, params, g, seed=a.seed)
    if a.algo == "bp":
        state = bpmod.bp(a.t, q0, params, g)
    elif a.algo == "adjusted":
        state = bpmod.adjusted_bp(a.t, q0, params, g)
    elif a.algo == "linearized":
        state = bpmod.linearized_bp(a.t, q0, params, g)
    elif a.algo == "adjusted-linearized":
        state = bpmod.adjusted_linearized_bp(a.t, q0, params, g)
    else:
        state = bpmod.path_bp(a.t, q0.vertex, params, g)
    if a.out:
        np.savetxt(a.out, state.vertex, fmt="%.12g")
    metrics = {"algo": a.algo, "t": a.t, "init": a.init, "signed": state.signed}
    if a.labels:
        metrics["agreement"] = agreement(read_labels(a.labels), state.labels())
    _emit(metrics)


def cmd_verify_bounds(a):
    g, _ = largest_component(read_edge_list(a.graph))
    ks = [a.k] if a.k is not None else bounds.valid_ks(g, a.r)
    reports = [bounds.check_lambda_inequality(g, a.r, k) for k in ks]
    _emit([r.to_dict() for r in reports])
    return EXIT_OK if all(r.inequality_holds for r in reports) else EXIT_CHECK


def cmd_sweep(a):
    config = ExperimentConfig.from_json(a.config)
    if a.output:
        config.output = a.output
    rows = run_sweep(config)
    _emit({"rows": len(rows), "errors": sum(1 for r in rows if r.error),
           "output": config.output, "hash": determinism_hash(config.output)})


def cmd_summarize(a):
    summary = summarize(a.csv, a.out)
    _emit(summary if not a.out else {"cells": len(summary), "out": a.out})


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="powergraph", description="Graph powering and spectral community detection.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("generate", help="sample a random graph")
    s.add_argument("--model", choices=["sbm", "gbm", "hbm", "er", "regular"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=float, default=6.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--s", type=float, default=1.0)
    s.add_argument("--t", type=float, default=10.0)
    s.add_argument("--h1", type=float, default=0.5)
    s.add_argument("--h2", type=float, default=0.5)
    s.add_argument("--d", type=float, default=3.0, help="average degree (er) or degree (regular)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--labels")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("power", help="graph power, distance or self-avoiding-walk matrix")
    s.add_argument("--graph", required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--kind", choices=["power", "distance", "saw"], default="power")
    s.add_argument("--guard-override", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_power)

    s = sub.add_parser("clean", help="degree cap, leaf and segment peeling, giant component")
    s.add_argument("--graph", required=True)
    s.add_argument("--tau", type=float)
    s.add_argument("--c", type=float, default=PsiParams.c)
    s.add_argument("--r", type=int)
    s.add_argument("--out")
    s.add_argument("--map-out")
    s.set_defaults(func=cmd_clean)

    s = sub.add_parser("cluster", help="spectral clustering into two communities")
    s.add_argument("--graph", required=True)
    s.add_argument("--method", choices=METHODS, default="meta")
    s.add_argument("--r", type=int)
    s.add_argument("--tau", type=float)
    s.add_argument("--c", type=float, default=PsiParams.c)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--labels")
    s.add_argument("--out")
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("bp", help="belief propagation on a symmetric two-community model")
    s.add_argument("--graph", required=True)
    s.add_argument("--algo", choices=["bp", "adjusted", "linearized", "adjusted-linearized", "path"],
                   default="bp")
    s.add_argument("--t", type=int, default=5)
    s.add_argument("--init", choices=["prior", "random", "high-degree"], default="random")
    s.add_argument("--a", type=float, default=6.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--labels")
    s.add_argument("--out")
    s.set_defaults(func=cmd_bp)

    s = sub.add_parser("verify-bounds",
                       help="check lambda_2(G^(r))^(2k) >= t_2k on the largest component")
    s.add_argument("--graph", required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--k", type=int)
    s.set_defaults(func=cmd_verify_bounds)

    s = sub.add_parser("sweep", help="run a JSON-configured experiment sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--output")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("summarize", help="mean/std per (grid point, method)")
    s.add_argument("--csv", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (PowerGraphError, OSError, ValueError, KeyError) as exc:
        print(f"powergraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
