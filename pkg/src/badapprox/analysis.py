"""Dimension formulas, the Hoelder-regularity experiment and measure ledgers.

Formulas are exact rationals.  The Hoelder experiment evaluates masses of
sampled squares exactly and only the final least-squares fit runs in
floating point; the certificate that accompanies it is again exact.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from .cantor import MassTree, mass_of_rect
from .construction import ConstructionParams, ExponentPair, LevelState, WeightPair, measure_rows
from .errors import InsufficientData, PreconditionError
from .exact import power_sign
from .geometry import Rect
from .surd import Surd, lower_rational, to_float


def dim_A2(w: WeightPair) -> Fraction:
    t1, t2 = w.tau1, w.tau2
    return min((3 + t1 - t2) / (1 + t1), 3 / (1 + t2))


def dim_rynne_dickinson(taus: Sequence) -> Fraction:
    """Dimension of the set of vectors approximable with exponents ``taus``."""
    ts = [Fraction(t) for t in taus]
    if not ts:
        raise PreconditionError("need at least one weight")
    if any(t <= 0 for t in ts):
        raise PreconditionError("weights must be positive")
    if any(a < b for a, b in zip(ts, ts[1:])):
        raise PreconditionError("weights must be nonincreasing")
    if sum(ts) <= 1:
        raise PreconditionError("weights must sum to more than 1")
    m = len(ts)
    return min((m + 1 + sum(ts[i] - ts[k] for k in range(i, m))) / (1 + ts[i]) for i in range(m))


def s_rho(w: WeightPair, e: ExponentPair) -> Fraction:
    t1, t2 = w.tau1, w.tau2
    return min((3 + t1 - t2) / (1 + t1), 3 / (1 + t2), 1 + e.rho2 / (1 + t2))


@dataclass
class DimensionReport:
    s: Fraction
    s_rho: Fraction
    epsilon: Fraction
    fitted_slope: float
    sample_count: int
    r_range: Tuple[float, float]
    threshold: Fraction = Fraction(0)
    points: List[Tuple[Fraction, Fraction, Fraction, Fraction]] = field(default_factory=list, repr=False)
    drawn: int = 0

    def max_ratio(self, alpha) -> float:
        a = float(alpha)
        return max(float(m) / float(r) ** a for _, _, r, m in self.points)

    def to_json(self):
        return {
            "s": str(self.s), "s_rho": str(self.s_rho), "epsilon": str(self.epsilon),
            "threshold": str(self.threshold), "fitted_slope": repr(self.fitted_slope),
            "sample_count": self.sample_count, "drawn": self.drawn,
            "r_range": [repr(self.r_range[0]), repr(self.r_range[1])],
        }


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BADAPPROX_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_map(fn, items):
    """``map`` that may fan out to threads; output order never changes."""
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _sample_point(node, rng: random.Random):
    c = node.shrink.center
    hw = [lower_rational(h) for h in node.shrink.halfwidth]
    return tuple(c[i] + Fraction(rng.randint(-999, 999), 1000) * hw[i] for i in (0, 1))


def _resolved_window(node) -> Tuple[float, float]:
    # from the node's own enlargement up to the cell its parent's children live in
    lo = to_float(min(node.enlargement.halfwidth))
    host = node.parent.nested_survivor if node.parent is not None else node.shrink
    hi = to_float(max(host.halfwidth))
    return lo, max(hi, lo)


def _draws(tree: MassTree, samples: int, r_lo, r_hi, seed: int):
    """Deterministic (x, r) pairs.

    Ball ``i`` sits on deepest node ``i mod len``, so nodes are hit evenly.
    log r is uniform on the window, driven by a scrambled Halton sequence
    rather than independent draws: each node's mass is a step function of
    r and plain Monte Carlo radii leave the fit noisy at a few thousand balls.
    """
    rng = random.Random(seed)
    deep = tree.deepest
    u = qmc.Halton(1, scramble=True, seed=seed).random(samples)[:, 0] if samples else []
    out = []
    for i in range(samples):
        node = deep[i % len(deep)]
        x = _sample_point(node, rng)
        lo, hi = (float(r_lo), float(r_hi)) if r_lo is not None else _resolved_window(node)
        r = Fraction(math.exp(math.log(lo) + float(u[i]) * (math.log(hi) - math.log(lo))))
        out.append((x, r))
    return out


def _masses(tree: MassTree, draws):
    return _ordered_map(lambda d: mass_of_rect(tree, Rect(d[0], (d[1], d[1]))), draws)


def holder_experiment(tree: MassTree, samples: int = 1600, r_lo=None, r_hi=None, seed: int = 0) -> DimensionReport:
    """Fit log mu(B(x, r)) against log r for balls centred near the support.

    With ``r_lo``/``r_hi`` given, radii are log-uniform on that range.
    Otherwise each ball draws its radius between its node's enlargement
    half-width and the half-width of the cell holding its siblings, the
    scales at which a finite tree actually resolves the measure.
    """
    if tree.depth < 2:
        raise PreconditionError("holder_experiment needs a tree of depth >= 2")
    if (r_lo is None) != (r_hi is None):
        raise PreconditionError("give both r_lo and r_hi or neither")
    if r_lo is not None:
        r_lo, r_hi = Fraction(r_lo), Fraction(r_hi)
        root_hw = min(tree.root.shrink.halfwidth)
        if not 0 < r_lo < r_hi or r_hi > root_hw:
            raise PreconditionError("need 0 < r_lo < r_hi <= root half-width")
    draws = _draws(tree, samples, r_lo, r_hi, seed)
    masses = _masses(tree, draws)
    pts = [(x[0], x[1], r, m) for (x, r), m in zip(draws, masses) if m > 0]
    if len(pts) < 10:
        raise InsufficientData(f"only {len(pts)} samples with positive mass")
    lr = np.array([math.log(r) for _, _, r, _ in pts])
    lm = np.array([math.log(m) for *_, m in pts])
    slope = float(np.polyfit(lr, lm, 1)[0])
    w, e = tree.params.weights, tree.params.exps
    sr = s_rho(w, e)
    radii = [float(r) for _, _, r, _ in pts]
    return DimensionReport(dim_A2(w), sr, tree.epsilon, slope, len(pts), (min(radii), max(radii)),
                           threshold=sr - 2 * tree.epsilon, points=pts, drawn=samples)


def certificate_constant(report: DimensionReport, alpha) -> Fraction:
    """Rational C at least every observed mu / r**alpha (checked exactly later)."""
    return Fraction(report.max_ratio(alpha) * (1 + 1e-9)).limit_denominator(10 ** 12) * (1 + Fraction(1, 10 ** 6))


def ball_bound_ok(m: Fraction, r: Fraction, alpha: Fraction, C: Fraction) -> bool:
    """``m <= C r**alpha`` exactly."""
    if m == 0:
        return True
    return power_sign([(m, 1), (C, -1), (r, -alpha)]) <= 0


def mass_distribution_certificate(tree: MassTree, alpha, r_o, C, samples: int = 1600, seed: int = 0,
                                  report: Optional[DimensionReport] = None) -> bool:
    """Exact check of ``mu(B(x, r)) <= C r**alpha`` on sampled balls with ``r <= r_o``.

    Balls are drawn as in :func:`holder_experiment`; passing ``report``
    reuses its sampled balls instead.
    """
    alpha, r_o, C = Fraction(alpha), Fraction(r_o), Fraction(C)
    if report is not None:
        rows = [(r, m) for _, _, r, m in report.points]
    else:
        draws = _draws(tree, samples, None, None, seed)
        rows = list(zip((r for _, r in draws), _masses(tree, draws)))
    return all(ball_bound_ok(m, r, alpha, C) for r, m in rows if r <= r_o)


@dataclass
class LedgerRow:
    level: int
    removed: Fraction
    bound: object
    cumulative: Fraction
    cumulative_bound: object
    ok: bool
    cumulative_ok: bool


def measure_ledger(state: LevelState) -> List[LedgerRow]:
    rows = []
    cum, cum_bound = Fraction(0), Fraction(0)
    for k, removed, bound in measure_rows(state):
        cum += removed
        cum_bound = cum_bound + bound
        rows.append(LedgerRow(k, removed, bound, cum, cum_bound, _le(removed, bound), _le(cum, cum_bound)))
    return rows


def _le(a, b) -> bool:
    if isinstance(b, Surd):
        return (b - a).sign() >= 0
    return a <= b


def local_retention(state: LevelState, k: int, i: int, j: int, deeper: int) -> Fraction:
    """Share of the level-``k`` cell ``(i, j)`` still surviving at level ``deeper``."""
    if not k < deeper <= state.level:
        raise PreconditionError("need k < deeper <= state.level")
    cell = state.params.ell_grid(k).cell(i, j)
    grid = state.params.ell_grid(deeper)
    kept = sum(1 for _ in state.surviving_cells(deeper, cell, inside=True))
    side = grid.side
    return kept * side[0] * side[1] / cell.area
