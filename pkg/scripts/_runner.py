"""Shared driver: run a sweep config, then print the per-method mean/std table."""
import argparse
import dataclasses
import os
import time

from powergraph.experiments import ExperimentConfig, determinism_hash, run_sweep, summarize


def main(default_config, description):
    ap = argparse.ArgumentParser(description=description)
    here = os.path.dirname(os.path.abspath(__file__))
    ap.add_argument("--config", default=os.path.join(here, "..", "configs", default_config))
    ap.add_argument("--trials", type=int, help="override the number of trials")
    ap.add_argument("--output", help="CSV path (resumes if it exists)")
    args = ap.parse_args()

    cfg = ExperimentConfig.from_json(args.config)
    if args.trials:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    if args.output:
        cfg = dataclasses.replace(cfg, output=args.output)
    start = time.perf_counter()
    run_sweep(cfg)
    print(f"# {cfg.output}  hash={determinism_hash(cfg.output)[:16]}  "
          f"{time.perf_counter() - start:.0f}s")
    print(f"{'grid':>4}  {'method':<24} {'mean':>6} {'std':>6}  trials  params")
    for row in summarize(cfg.output):
        print(f"{row['grid_index']:>4}  {row['method']:<24} {row['mean']:6.3f} {row['std']:6.3f}"
              f"  {row['trials']:>6}  {row['params']}")
