"""Inject each known defect and show which verification suites notice.

    python3 scripts/fault_demo.py
"""

import argparse
from dataclasses import replace
from fractions import Fraction

from badapprox.config import FAULTS, load_config
from badapprox.geometry import Rect
from badapprox.pipeline import run_build, verify


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    args = ap.parse_args()
    base = load_config(args.config)
    if args.config is None:
        # corner window: the half-width slab misses rationals on the edges
        base = replace(base, window=Rect.from_bounds(0, Fraction(1, 64), 0, Fraction(1, 64)), max_level=2, depth=1)
    for fault in (None,) + FAULTS:
        run = run_build(replace(base, fault=fault))
        failed = [c.line() for c in verify(run, 100) if not c.passed]
        print(f"fault={fault}:")
        for line in failed or ["all suites pass"]:
            print("   ", line)


if __name__ == "__main__":
    main()
