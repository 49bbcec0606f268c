"""Level-by-level construction of the avoidance set inside a window.

The survivor set at level ``n`` is kept implicitly: a cell of the
``ell(n)`` grid survives iff its parent survives and it meets none of the
level-``n`` slabs.  Only hosts (``V_{n,n}`` cells) near the working window
are materialised.  Each level ``k`` has its own validity region
``regions[k]``; the padding between consecutive regions is chosen so that
every slab or survivor query made while building level ``k`` lands inside
``regions[k-1]``.  Inside ``regions[k]`` the windowed state therefore agrees
exactly with the full construction.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import (ConfigError, DegenerateWindow, OutOfWindow, SimplexViolation,
                     WindowTruncation)
from .exact import Vec, fmt, rat
from .geometry import (UNIT_SQUARE, Line, Rect, SegmentNeighborhood, clamp_unit, rect_contains,
                       rect_chebyshev_contains, rect_intersects, slab_meets_rect, slab_rect_area)
from .rationals import EMPTY, RatPoint, collinear, rationals_in_rect
from .surd import Surd, ceil_of, floor_of, power

C2 = Fraction(3, 400)


def exact_power(base: int, exp) -> Fraction:
    """``base**exp`` which the caller knows to be rational."""
    v = power(base, exp)
    if isinstance(v, Surd):
        raise ConfigError(f"{base}^({exp}) is irrational")
    return v


@dataclass(frozen=True)
class WeightPair:
    tau1: Fraction
    tau2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "tau1", rat(self.tau1))
        object.__setattr__(self, "tau2", rat(self.tau2))
        if not self.tau2 > 0:
            raise ConfigError(f"tau2 must be positive (got {fmt(self.tau2)})")
        if self.tau1 < self.tau2:
            raise ConfigError(f"weights must satisfy tau1 >= tau2 (got {fmt(self.tau1)} < {fmt(self.tau2)})")
        if not self.tau1 + self.tau2 > 1:
            raise ConfigError(f"weights must satisfy tau1 + tau2 > 1 (got {fmt(self.sigma)})")

    @property
    def sigma(self) -> Fraction:
        return self.tau1 + self.tau2

    def __getitem__(self, i):
        return (self.tau1, self.tau2)[i]


@dataclass(frozen=True)
class ExponentPair:
    rho1: Fraction
    rho2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rho1", rat(self.rho1))
        object.__setattr__(self, "rho2", rat(self.rho2))
        if self.rho1 + self.rho2 != 3:
            raise ConfigError("exponents must sum to 3")
        if not (self.rho1 >= self.rho2 >= 1):
            raise ConfigError("exponents must satisfy rho1 >= rho2 >= 1")

    def __getitem__(self, i):
        return (self.rho1, self.rho2)[i]

    def check_against(self, w: WeightPair):
        for i in (0, 1):
            if not 1 + w[i] - self[i] > 0:
                raise ConfigError(f"need 1 + tau{i+1} - rho{i+1} > 0")

    def eps_prime(self, w: WeightPair) -> Fraction:
        return min(1 + w[i] - self[i] for i in (0, 1))


def choose_exponents(w: WeightPair, D: int = 16) -> ExponentPair:
    if w.tau2 > Fraction(1, 2):
        return ExponentPair(Fraction(3, 2), Fraction(3, 2))
    # largest k/D in [1, 1 + tau2), clamped so that rho1 >= rho2.  It must
    # also exceed 2 - tau1; that interval is nonempty since tau1 + tau2 > 1,
    # but may hold no k/D for small D, so D doubles until it does.
    while True:
        k = math.ceil((1 + w.tau2) * D) - 1
        r2 = max(min(Fraction(k, D), Fraction(3, 2)), Fraction(1))
        if 1 + w.tau1 - (3 - r2) > 0:
            e = ExponentPair(3 - r2, r2)
            e.check_against(w)
            return e
        D *= 2


def _lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


def _smallest_power_at_least(b: int, lo: int) -> int:
    r = 1
    while r ** b < lo:
        r += 1
    return r ** b


def choose_base(exps: ExponentPair, minimum: int = 1, weights: Optional[WeightPair] = None) -> Tuple[int, int]:
    """Smallest ``N >= minimum`` and ``t > 2`` that are ``b``-th powers,
    ``b`` the lcm of the exponent denominators.  With ``weights`` the
    denominators of ``tau`` join the lcm, which makes ``c(N)`` and every
    ``delta(n)`` rational."""
    dens = [exps.rho1.denominator, exps.rho2.denominator]
    if weights is not None:
        dens += [weights.tau1.denominator, weights.tau2.denominator]
    b = _lcm(*dens)
    return _smallest_power_at_least(b, max(2, minimum)), _smallest_power_at_least(b, 3)


@dataclass(frozen=True)
class ConstructionParams:
    weights: WeightPair
    exps: ExponentPair
    N: int
    t: int

    def __hash__(self):
        return self._hash

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.weights.tau1, self.weights.tau2, self.exps.rho1,
                                                self.exps.rho2, self.N, self.t)))
        self.exps.check_against(self.weights)
        if self.t <= 2:
            raise ConfigError("t must exceed 2")
        if self.N < 2:
            raise ConfigError("N must be at least 2")
        for i in (0, 1):
            for base in (self.N, self.t):
                if isinstance(power(base, self.exps[i]), Surd):
                    raise ConfigError(f"{base}^rho{i+1} must be an integer")
            if isinstance(power(self.N, 1 + self.weights[i]), Surd):
                raise ConfigError(f"N^(1+tau{i+1}) must be rational for exact slab widths")

    @property
    def tau(self) -> Vec:
        return (self.weights.tau1, self.weights.tau2)

    @property
    def rho(self) -> Vec:
        return (self.exps.rho1, self.exps.rho2)

    @property
    def eps_prime(self) -> Fraction:
        return self.exps.eps_prime(self.weights)

    def axis_count(self, n: int, i: int) -> int:
        return _axis_count(self, n, i)

    def ell(self, n: int) -> Tuple[int, int]:
        return _ell(self, n)

    def _ell(self, n: int) -> Tuple[int, int]:
        return tuple(math.ceil((n + 2) * (1 + self.tau[i]) / self.rho[i]) for i in (0, 1))

    def delta(self, n: int) -> Vec:
        return _delta(self, n)

    def _delta(self, n: int) -> Vec:
        return tuple(1 / exact_power(self.t, self.rho[i]) / exact_power(self.N, (n + 2) * (1 + self.tau[i]))
                     for i in (0, 1))

    @property
    def cN(self) -> Vec:
        return tuple(1 / exact_power(self.t, self.rho[i]) / exact_power(self.N, 3 * (1 + self.tau[i]))
                     for i in (0, 1))

    @property
    def c1(self) -> Fraction:
        return (Fraction(1, 4) / self.t ** 3 / self.N ** 3
                / exact_power(self.N, 2 * (2 + self.weights.sigma)))

    @property
    def C1(self) -> Fraction:
        return 36 / (self.c1 * C2)

    def host_grid(self, n: int) -> "GridSpec":
        return _grid(self, n, n)

    def ell_grid(self, n: int) -> "GridSpec":
        l1, l2 = self.ell(n)
        return _grid(self, l1, l2)

    def shrink_halfwidth(self, q: int):
        return tuple(power(q, -1 - self.tau[i]) for i in (0, 1))

    def enlargement_halfwidth(self, q: int):
        return tuple(power(q, -self.rho[i], 3) for i in (0, 1))

    def to_json(self):
        return {"tau": [fmt(x) for x in self.tau], "rho": [fmt(x) for x in self.rho],
                "N": self.N, "t": self.t}


@lru_cache(maxsize=None)
def _ell(params, n):
    return params._ell(n)


@lru_cache(maxsize=None)
def _delta(params, n):
    return params._delta(n)


@lru_cache(maxsize=None)
def _axis_count(params: ConstructionParams, n: int, i: int) -> int:
    return int(exact_power(params.t, params.rho[i]) * exact_power(params.N, n * params.rho[i]))


@lru_cache(maxsize=None)
def _grid(params: ConstructionParams, n1: int, n2: int) -> "GridSpec":
    return GridSpec(params, n1, n2)


@dataclass(frozen=True)
class GridSpec:
    """The grid ``V_{n1,n2}`` on the unit square."""

    params: ConstructionParams
    n1: int
    n2: int

    @property
    def counts(self) -> Tuple[int, int]:
        return _axis_count(self.params, self.n1, 0), _axis_count(self.params, self.n2, 1)

    @property
    def side(self) -> Vec:
        m1, m2 = self.counts
        return Fraction(1, m1), Fraction(1, m2)

    def cell(self, i: int, j: int) -> Rect:
        m1, m2 = self.counts
        return Rect.from_bounds(Fraction(i, m1), Fraction(i + 1, m1), Fraction(j, m2), Fraction(j + 1, m2))

    def index_range(self, r: Rect) -> Optional[Tuple[int, int, int, int]]:
        """Index box (i0, i1, j0, j1) of the closed cells meeting ``r``."""
        box = clamp_unit(r)
        if box is None:
            return None
        m1, m2 = self.counts
        x0, x1, y0, y1 = box.bounds
        i0 = max(0, ceil_of(x0 * m1) - 1)
        i1 = min(m1 - 1, floor_of(x1 * m1))
        j0 = max(0, ceil_of(y0 * m2) - 1)
        j1 = min(m2 - 1, floor_of(y1 * m2))
        return i0, i1, j0, j1

    def cells_containing(self, p) -> List[Tuple[int, int]]:
        m1, m2 = self.counts
        axes = []
        for v, m in ((p[0], m1), (p[1], m2)):
            s = v * m
            k = floor_of(s)
            ks = [k]
            if s == k:
                ks.append(k - 1)
            axes.append(sorted(x for x in ks if 0 <= x < m))
        return [(i, j) for i in axes[0] for j in axes[1]]

    def inside_index_range(self, r: Rect) -> Optional[Tuple[int, int, int, int]]:
        """Cells lying entirely inside ``r``."""
        box = clamp_unit(r)
        if box is None:
            return None
        m1, m2 = self.counts
        x0, x1, y0, y1 = box.bounds
        i0, i1 = ceil_of(x0 * m1), floor_of(x1 * m1) - 1
        j0, j1 = ceil_of(y0 * m2), floor_of(y1 * m2) - 1
        if i0 > i1 or j0 > j1:
            return None
        return i0, i1, j0, j1


@dataclass(frozen=True)
class LeadingRational:
    point: RatPoint
    level: int
    host_line: Line

    def to_json(self):
        return {"point": self.point.to_json(), "level": self.level, "line": self.host_line.to_json()}


def hyperplane_of_cell(params: ConstructionParams, cell: Rect, n: int):
    """Common line of the rationals with ``q < N**n`` in ``cell``, or EMPTY."""
    pts = rationals_in_rect(cell, 1, params.N ** n - 1)
    line = collinear(pts)
    if line is None:
        raise SimplexViolation(f"non-collinear rationals in cell {cell.to_json()} at level {n}")
    return line


def _pad(r: Rect, pad: Vec) -> Rect:
    return clamp_unit(r.expanded(pad)) or r


def level_regions(params: ConstructionParams, window: Rect, max_level: int,
                  avoid_pad: bool = True) -> Dict[int, Rect]:
    """Nested validity regions, outermost at level 0.  ``avoid_pad`` widens
    the top region by ``c(N)`` so avoidance boxes of window points fit."""
    regions = {}
    cN = params.cN if avoid_pad else (0, 0)
    top_side = params.ell_grid(max(max_level, 1)).side
    regions[max_level] = _pad(window, tuple(max(top_side[i], cN[i]) for i in (0, 1)))
    for k in range(max_level, 0, -1):
        hs, ls, lp = params.host_grid(k).side, params.ell_grid(k).side, params.ell_grid(max(k - 1, 1)).side
        d = params.delta(k)
        pad = tuple(ls[i] + 3 * hs[i] + d[i] + lp[i] for i in (0, 1))
        regions[k - 1] = _pad(regions[k], pad)
    return regions


class LevelState:
    """Survivor set ``S_level`` restricted to a window, plus the removed
    slabs and leading rationals that produced it."""

    def __init__(self, params: ConstructionParams, window: Rect, max_level: int,
                 regions=None, level: int = 0, slabs=None, lines=None, leading=None, memo=None,
                 fault=None):
        self.params = params
        self.window = window
        self.max_level = max_level
        self.regions = regions or level_regions(params, window, max_level)
        self.level = level
        self.slabs: Dict[int, Dict[Tuple[int, int], SegmentNeighborhood]] = slabs or {}
        self.lines: Dict[int, Dict[Tuple[int, int], Line]] = lines or {}
        self.leading: List[LeadingRational] = leading or []
        self._memo: Dict[Tuple[int, int, int], bool] = memo if memo is not None else {}
        self.fault = fault

    # ---- views -----------------------------------------------------------
    @property
    def removed(self) -> List[SegmentNeighborhood]:
        out = []
        for k in sorted(self.slabs):
            out.extend(self.slabs[k][h] for h in sorted(self.slabs[k]))
        return out

    def slabs_at(self, k: int) -> List[SegmentNeighborhood]:
        d = self.slabs.get(k, {})
        return [d[h] for h in sorted(d)]

    # ---- survivor predicate ---------------------------------------------
    def cell_survives(self, k: int, i: int, j: int) -> bool:
        """Whether cell (i, j) of the ``ell(k)`` grid is in ``S_k``."""
        if k == 0:
            return True
        if k > self.level:
            raise ValueError(f"level {k} not built (state at level {self.level})")
        key = (k, i, j)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        params = self.params
        grid = params.ell_grid(k)
        i0, i1, j0, j1 = self._region_index(k)
        if not (i0 <= i <= i1 and j0 <= j <= j1):
            raise OutOfWindow(f"level-{k} cell {(i, j)} lies outside the built region")
        m1, m2 = grid.counts
        ok = True
        if k >= 2:
            pm1, pm2 = params.ell_grid(k - 1).counts
            ok = self.cell_survives(k - 1, i // (m1 // pm1), j // (m2 // pm2))
        if ok:
            h1, h2 = params.host_grid(k).counts
            hi, hj = i // (m1 // h1), j // (m2 // h2)
            slabs = self.slabs.get(k, {})
            cell = None
            for a in range(hi - 2, hi + 3):
                for b in range(hj - 2, hj + 3):
                    s = slabs.get((a, b))
                    if s is None:
                        continue
                    if cell is None:
                        cell = grid.cell(i, j)
                    if slab_meets_rect(s, cell):
                        ok = False
                        break
                if not ok:
                    break
        self._memo[key] = ok
        return ok

    def _region_index(self, k: int):
        cache = self.__dict__.setdefault("_ridx", {})
        if k not in cache:
            cache[k] = self.params.ell_grid(k).index_range(self.regions[k])
        return cache[k]

    def surviving_cells(self, k: int, r: Rect, inside: bool = False) -> Iterator[Tuple[int, int]]:
        """Surviving ``ell(k)`` cells meeting (or lying inside) ``r``, row-major."""
        grid = self.params.ell_grid(k)
        rng = grid.inside_index_range(r) if inside else grid.index_range(r)
        if rng is None:
            return
        i0, i1, j0, j1 = rng
        for j in range(j0, j1 + 1):
            for i in range(i0, i1 + 1):
                if self.cell_survives(k, i, j):
                    yield (i, j)

    def any_survivor(self, k: int, r: Rect) -> bool:
        return next(self.surviving_cells(k, r), None) is not None

    # ---- levels ------------------------------------------------------------
    def _child(self, **kw) -> "LevelState":
        d = dict(params=self.params, window=self.window, max_level=self.max_level, regions=self.regions,
                 level=self.level, slabs=dict(self.slabs), lines=dict(self.lines),
                 leading=list(self.leading), memo=self._memo, fault=self.fault)
        d.update(kw)
        return LevelState(**d)


def initial_state(params: ConstructionParams, window: Rect, max_level: int, fault=None,
                  avoid_pad: bool = True) -> LevelState:
    if clamp_unit(window) is None:
        raise DegenerateWindow("window does not meet the unit square")
    if max_level >= 1 and params.ell_grid(max_level).inside_index_range(window) is None:
        raise DegenerateWindow(f"window holds no cell of the level-{max_level} survivor grid")
    regions = level_regions(params, window, max_level, avoid_pad)
    return LevelState(params, window, max_level, regions=regions, fault=fault)


def _bucket(points: Sequence[RatPoint], grid: GridSpec, keep) -> Dict[Tuple[int, int], List[RatPoint]]:
    buckets: Dict[Tuple[int, int], List[RatPoint]] = {}
    for p in points:
        for h in grid.cells_containing(p.xy):
            if keep(h):
                buckets.setdefault(h, []).append(p)
    return buckets


def build_level(prev: LevelState) -> LevelState:
    params = prev.params
    n = prev.level + 1
    if n > prev.max_level:
        raise ValueError(f"state was laid out for {prev.max_level} levels")
    hosts = params.host_grid(n)
    hside = hosts.side
    block = _pad(prev.regions[n], tuple(3 * hside[i] + params.ell_grid(n).side[i] for i in (0, 1)))
    inside = hosts.inside_index_range(block)
    if inside is None:
        inside = hosts.index_range(block)
    i0, i1, j0, j1 = inside

    def keep(h):
        return i0 <= h[0] <= i1 and j0 <= h[1] <= j1

    Nn = params.N ** n
    pts = rationals_in_rect(block, 1, Nn - 1)
    buckets = _bucket(pts, hosts, keep)
    delta = params.delta(n)
    if prev.fault == "half-delta":
        delta = (delta[0] / 2, delta[1] / 2)
    lines, slabs, leading = {}, {}, []
    seen = {lr.point for lr in prev.leading}
    lo_q = params.N ** (n - 1)
    for h in sorted(buckets):
        bucket = buckets[h]
        line = collinear(bucket)
        if line is None:
            raise SimplexViolation(f"non-collinear rationals in host {h} at level {n}")
        lines[h] = line
        if n == 1:
            witnesses = bucket
        else:
            witnesses = [p for p in bucket if p.q >= lo_q
                         and prev.any_survivor(n - 1, Rect(p.xy, params.delta(n)))]
        if not witnesses:
            continue
        slabs[h] = SegmentNeighborhood(line, hosts.cell(*h), delta, n)
        for p in witnesses:
            if p not in seen:
                seen.add(p)
                leading.append(LeadingRational(p, n, line))
    new_lines = dict(prev.lines)
    new_lines[n] = lines
    new_slabs = dict(prev.slabs)
    new_slabs[n] = slabs
    all_leading = sorted(prev.leading + leading, key=lambda lr: lr.point.key)
    return prev._child(level=n, slabs=new_slabs, lines=new_lines, leading=all_leading)


def build_to(state: LevelState, level: int) -> LevelState:
    while state.level < level:
        state = build_level(state)
    return state


def survives(state: LevelState, p) -> bool:
    p = (rat(p[0]), rat(p[1]))
    if not rect_chebyshev_contains(state.window, p):
        raise OutOfWindow("point outside the window")
    if state.level == 0:
        return True
    grid = state.params.ell_grid(state.level)
    return any(state.cell_survives(state.level, i, j) for i, j in grid.cells_containing(p))


def avoidance_check(state: LevelState, pt: RatPoint) -> bool:
    """No surviving deepest-grid cell meets ``Delta(pt, c(N) q^(-1-tau))``."""
    if state.level == 0:
        return True
    cN = state.params.cN
    hw = state.params.shrink_halfwidth(pt.q)
    box = Rect(pt.xy, (cN[0] * hw[0], cN[1] * hw[1]))
    return not state.any_survivor(state.level, box)


def leading_rationals(state: LevelState) -> List[LeadingRational]:
    return sorted(state.leading, key=lambda lr: lr.point.key)


def delta_bound_violations(state: LevelState) -> List[LeadingRational]:
    """Leading rationals with ``delta_i(n) > q^(-rho_i)`` for some i."""
    out = []
    for lr in state.leading:
        d = state.params.delta(lr.level)
        if any(d[i] > power(lr.point.q, -state.params.rho[i]) for i in (0, 1)):
            out.append(lr)
    return out


def _ring(ci, cj, d):
    if d == 0:
        yield ci, cj
        return
    for i in range(ci - d, ci + d + 1):
        yield i, cj - d
    for j in range(cj - d + 1, cj + d):
        yield ci - d, j
        yield ci + d, j
    for i in range(ci - d, ci + d + 1):
        yield i, cj + d


def nested_survivor_for(state: LevelState, lr: LeadingRational, anchor=(0, 0)) -> Rect:
    """A surviving ``ell(n-1)`` cell inside the shrink of ``lr``, nearest to
    ``centre + anchor * halfwidth`` first; checked against the ``c1`` area bound."""
    params = state.params
    k = lr.level - 1
    shrink = Rect(lr.point.xy, params.shrink_halfwidth(lr.point.q))
    grid = params.ell_grid(k)
    rng = grid.inside_index_range(shrink)
    if rng is None:
        raise WindowTruncation(f"no level-{k} cell fits inside the shrink of {lr.point.to_json()}")
    i0, i1, j0, j1 = rng
    m1, m2 = grid.counts
    at = [shrink.center[i] + Fraction(anchor[i]) * shrink.halfwidth[i] for i in (0, 1)]
    ci = min(max(floor_of(at[0] * m1), i0), i1)
    cj = min(max(floor_of(at[1] * m2), j0), j1)
    target = params.c1 * shrink.area
    ri0, ri1, rj0, rj1 = state._region_index(k) if k > 0 else (i0, i1, j0, j1)
    radius = max(ci - i0, i1 - ci, cj - j0, j1 - cj)
    for d in range(radius + 1):
        for i, j in _ring(ci, cj, d):
            if not (i0 <= i <= i1 and j0 <= j <= j1 and ri0 <= i <= ri1 and rj0 <= j <= rj1):
                continue
            if state.cell_survives(k, i, j):
                cell = grid.cell(i, j)
                if not (cell.area >= target and rect_contains(shrink, cell)):
                    raise WindowTruncation("nested cell violates the c1 area bound")
                return cell
    raise WindowTruncation(f"no surviving level-{k} cell inside the shrink of {lr.point.to_json()} within the window")


def measure_rows(state: LevelState):
    """(level, removed area / window area, bound term 40 N^(-eps' n))."""
    out = []
    wa = clamp_unit(state.window).area
    for k in range(1, state.level + 1):
        area = sum((slab_rect_area(s, clamp_unit(state.window)) for s in state.slabs_at(k)), Fraction(0))
        out.append((k, area / wa, 40 * power(state.params.N, -state.params.eps_prime * k)))
    return out
