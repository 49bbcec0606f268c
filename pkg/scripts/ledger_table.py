"""Removed area per level against the bound 40 N^(-eps' n), exact and as decimals.

    python3 scripts/ledger_table.py --levels 3
"""

import argparse
from dataclasses import replace

from badapprox.analysis import measure_ledger
from badapprox.config import load_config
from badapprox.pipeline import build_state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--levels", type=int, default=3)
    args = ap.parse_args()
    cfg = replace(load_config(args.config), max_level=args.levels)
    state = build_state(cfg)
    print(f"{'n':>2} {'removed':>14} {'cumulative':>14} {'bound':>8}  exact cumulative")
    for r in measure_ledger(state):
        print(f"{r.level:2d} {float(r.removed):14.6e} {float(r.cumulative):14.6e} "
              f"{float(r.cumulative_bound):8.3f}  {r.cumulative}")


if __name__ == "__main__":
    main()
