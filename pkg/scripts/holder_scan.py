"""Slope of the Hoelder fit across seeds and sample counts.

    python3 scripts/holder_scan.py --config scripts/example.cfg --depth 2
"""

import argparse
from dataclasses import replace

from badapprox.analysis import holder_experiment
from badapprox.config import load_config
from badapprox.pipeline import run_build


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--depth", type=int, default=2)
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--samples", type=int, nargs="+", default=[400, 800, 1600, 3200])
    args = ap.parse_args()
    cfg = replace(load_config(args.config), depth=args.depth)
    run = run_build(cfg)
    print("sizes", [len(l) for l in run.tree.layers], "threshold", float(run.holder.threshold))
    print("seed " + " ".join(f"{n:>8d}" for n in args.samples))
    for seed in range(args.seeds):
        slopes = [holder_experiment(run.tree, n, seed=seed).fitted_slope for n in args.samples]
        print(f"{seed:4d} " + " ".join(f"{s:8.4f}" for s in slopes))


if __name__ == "__main__":
    main()
