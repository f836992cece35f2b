"""Sweeps over block-model parameters and clustering methods, persisted as CSV.

Rows are keyed by (grid index, method, trial); an interrupted sweep resumes by
skipping keys already present in the output file. The finished file is
rewritten in sorted order so that its content does not depend on scheduling.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from powergraph.errors import InvalidParams, PowerGraphError, SchemaMismatch
from powergraph.generators import (
    GbmParams,
    HbmParams,
    derive_seed,
    gen_gbm,
    gen_hbm,
    gen_sbm_sym,
)
from powergraph.graph import LabeledGraph, diameter, largest_component
from powergraph.pipeline import PsiParams, backfill, meta_cluster
from powergraph.spectral import METHODS, Partition, agreement, spectral_cluster

SCHEMA_TAG = "# schema=powergraph-sweep-v1"
COLUMNS = ["grid_index", "params", "method", "trial", "graph_seed", "method_seed", "r",
           "agreement", "ev1", "ev2", "ev3", "cleaning", "error", "runtime_ms"]
HASH_EXCLUDE = ("runtime_ms",)
MODELS = ("sbm", "gbm", "hbm")
EXTRA_METHODS = ("location_oracle",)


@dataclass
class ExperimentConfig:
    """``grid`` is a list of model-parameter dicts; ``method_params`` may hold
    ``r`` (fixed power), ``r_factor`` (r = round(r_factor * diameter of the giant)),
    ``tau`` and ``c`` for the meta-algorithm."""

    model: str
    grid: list
    methods: list
    trials: int = 1
    base_seed: int = 0
    output: str = "sweep.csv"
    method_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidParams(f"model must be one of {MODELS}")
        if self.trials < 1:
            raise InvalidParams("trials must be >= 1")
        if not self.grid or not self.methods:
            raise InvalidParams("grid and methods must be non-empty")
        for m in self.methods:
            if m not in METHODS + EXTRA_METHODS:
                raise InvalidParams(f"unknown method {m!r}")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls(**json.load(fh))


@dataclass
class ResultRow:
    grid_index: int
    params: str
    method: str
    trial: int
    graph_seed: int
    method_seed: int
    r: int = 0
    agreement: float = float("nan")
    ev1: float = float("nan")
    ev2: float = float("nan")
    ev3: float = float("nan")
    cleaning: str = ""
    error: str = ""
    runtime_ms: int = 0

    def key(self):
        return (int(self.grid_index), self.method, int(self.trial))


def generate(model: str, params: dict, seed) -> LabeledGraph:
    p = dict(params)
    if model == "sbm":
        return gen_sbm_sym(p["n"], p["a"], p["b"], seed)
    if model == "gbm":
        return gen_gbm(GbmParams(p["n"], p["s"], p["t"]), seed)
    return gen_hbm(HbmParams(p["n"], p["a"], p["b"], p["s"], p["t"], p["h1"], p["h2"]), seed)


def location_oracle(lg: LabeledGraph) -> Partition:
    """Sign of the x-coordinate: the known-location reference classifier."""
    loc = lg.meta.get("locations")
    if loc is None:
        raise InvalidParams("location_oracle needs a geometric model")
    return Partition(np.where(loc[:, 0] < 0, 1, 2), 2)


def run_method(lg: LabeledGraph, method: str, mparams: dict, seed) -> dict:
    """Cluster ``lg`` with one method and score it over all vertices.

    Vertex-space methods other than ``meta`` run on the largest component;
    the remaining vertices are filled by the surviving-neighbour majority rule.
    """
    g = lg.graph
    out = {"r": 0, "eigenvalues": [], "cleaning": ""}
    if method == "location_oracle":
        part = location_oracle(lg)
    elif method == "meta":
        params = PsiParams(tau=mparams.get("tau"), c=mparams.get("c", PsiParams.c),
                           r_override=mparams.get("r"))
        part = meta_cluster(g, params, seed=seed)
        out["r"] = part.info["r"]
        out["cleaning"] = json.dumps(part.info["cleaning"], sort_keys=True)
    else:
        giant, ids = largest_component(g)
        r = mparams.get("r")
        if r is None and "r_factor" in mparams:
            r = max(1, round(mparams["r_factor"] * diameter(giant)))
        r = int(r or 2)
        sub = spectral_cluster(giant, method, r=r, seed=seed)
        part = Partition(backfill(g, sub.labels, ids, seed), 2, sub.degenerate, sub.info)
        if method in ("powered_adjacency", "powered_nonbacktracking", "distance_matrix"):
            out["r"] = r
    out["eigenvalues"] = list(part.info.get("eigenvalues", []))
    out["agreement"] = agreement(lg.labels, part)
    return out


def _grid_key(params: dict) -> str:
    return json.dumps(params, sort_keys=True)


def _run_cell(model, params, grid_index, method, trial, base_seed, mparams) -> ResultRow:
    graph_seed = derive_seed(base_seed, grid_index, trial)
    method_seed = derive_seed(base_seed, grid_index, method, trial)
    row = ResultRow(grid_index, _grid_key(params), method, trial, graph_seed, method_seed)
    start = time.perf_counter()
    try:
        lg = generate(model, params, graph_seed)
        res = run_method(lg, method, mparams, method_seed)
        row.agreement = float(res["agreement"])
        ev = (res["eigenvalues"] + [float("nan")] * 3)[:3]
        row.ev1, row.ev2, row.ev3 = (float(x) for x in ev)
        row.r = int(res["r"])
        row.cleaning = res["cleaning"]
    except PowerGraphError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    row.runtime_ms = int(1000 * (time.perf_counter() - start))
    return row


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if np.isnan(v) else repr(round(v, 12))
    return str(v)


def _write_rows(path: Path, rows, mode="a"):
    new = mode == "w" or not path.exists() or path.stat().st_size == 0
    with open(path, mode, newline="") as fh:
        if new:
            fh.write(SCHEMA_TAG + "\n")
            fh.write(",".join(COLUMNS) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            d = asdict(row)
            w.writerow([_fmt(d[c]) for c in COLUMNS])


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        tag = fh.readline().rstrip("\n")
        if tag != SCHEMA_TAG:
            raise SchemaMismatch(f"{path}: expected {SCHEMA_TAG!r}, found {tag!r}")
        reader = csv.DictReader(fh)
        if reader.fieldnames != COLUMNS:
            raise SchemaMismatch(f"{path}: unexpected columns {reader.fieldnames}")
        return list(reader)


def _row_from_dict(d: dict) -> ResultRow:
    return ResultRow(int(d["grid_index"]), d["params"], d["method"], int(d["trial"]),
                     int(d["graph_seed"]), int(d["method_seed"]), int(d["r"]),
                     float(d["agreement"]), float(d["ev1"]), float(d["ev2"]), float(d["ev3"]),
                     d["cleaning"], d["error"], int(d["runtime_ms"]))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("POWERGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config: ExperimentConfig, workers: int | None = None) -> list[ResultRow]:
    path = Path(config.output)
    done = {}
    if path.exists() and path.stat().st_size:
        for d in read_rows(path):
            row = _row_from_dict(d)
            done[row.key()] = row
    method_order = {m: i for i, m in enumerate(config.methods)}
    cells = [(config.model, params, gi, m, t, config.base_seed, config.method_params)
             for gi, params in enumerate(config.grid)
             for m in config.methods for t in range(config.trials)
             if (gi, m, t) not in done]
    workers = workers or worker_count()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, *c) for c in cells]
            for fut in futures:
                row = fut.result()
                _write_rows(path, [row])
                done[row.key()] = row
    else:
        for c in cells:
            row = _run_cell(*c)
            _write_rows(path, [row])
            done[row.key()] = row
    rows = sorted(done.values(), key=lambda r: (r.grid_index, method_order.get(r.method, 99),
                                                r.method, r.trial))
    _write_rows(path, rows, mode="w")
    return rows


def determinism_hash(path) -> str:
    """SHA-256 of the CSV content with the runtime column removed."""
    rows = read_rows(path)
    keep = [c for c in COLUMNS if c not in HASH_EXCLUDE]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keep)
    for d in rows:
        w.writerow([d[c] for c in keep])
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


SUMMARY_COLUMNS = ["grid_index", "params", "method", "trials", "errors", "mean", "std"]


def summarize(path, out=None) -> list[dict]:
    """Mean and population std of agreement per (grid point, method), long format."""
    rows = read_rows(path)
    cells: dict = {}
    for d in rows:
        key = (int(d["grid_index"]), d["params"], d["method"])
        cells.setdefault(key, []).append(d)
    summary = []
    for (gi, params, method), ds in cells.items():
        vals = np.array([float(d["agreement"]) for d in ds if not d["error"]])
        summary.append({"grid_index": gi, "params": params, "method": method,
                        "trials": len(ds), "errors": sum(1 for d in ds if d["error"]),
                        "mean": float(vals.mean()) if len(vals) else float("nan"),
                        "std": float(vals.std()) if len(vals) else float("nan")})
    if out is not None:
        with open(out, "w", newline="") as fh:
            w = csv.DictWriter(fh, SUMMARY_COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(summary)
    return summary
