"""Rational points of the unit square with a shared denominator.

Enumeration is per denominator: for each ``q`` the numerators form an
integer box.  Long denominator ranges over tiny rectangles (the deep
levels of the construction scan ``q`` up to ~1e8) go through a numpy
prefilter in floating point; every candidate it returns is re-checked
exactly, and the prefilter tolerance is far wider than float64 error at
these magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Union

import numpy as np

from .exact import Vec, power_lt, rat
from .geometry import Line, Rect, clamp_unit, rect_chebyshev_contains

_CHUNK = 1 << 22
_LOOP_LIMIT = 4096


@dataclass(frozen=True)
class RatPoint:
    p1: int
    p2: int
    q: int

    @property
    def key(self):
        return (self.q, self.p1, self.p2)

    def __lt__(self, other):
        return self.key < other.key

    @property
    def xy(self) -> Vec:
        return (Fraction(self.p1, self.q), Fraction(self.p2, self.q))

    @property
    def reduced(self) -> bool:
        return math.gcd(math.gcd(self.p1, self.p2), self.q) == 1

    def to_json(self):
        return [str(self.p1), str(self.p2), str(self.q)]

    @classmethod
    def from_json(cls, v):
        return cls(int(v[0]), int(v[1]), int(v[2]))


class _Empty:
    """Marker for 'no points given', distinct from 'not collinear' (None)."""

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _Empty()


def _ceil(x: Fraction, q: int) -> int:
    return -((-x.numerator * q) // x.denominator)


def _floor(x: Fraction, q: int) -> int:
    return (x.numerator * q) // x.denominator


def _candidate_qs(x0, x1, y0, y1, qmin, qmax):
    """Denominators for which both numerator boxes may be nonempty."""
    if qmax - qmin < _LOOP_LIMIT:
        yield from range(qmin, qmax + 1)
        return
    fx0, fx1, fy0, fy1 = (float(v) for v in (x0, x1, y0, y1))
    tol = 1e-6
    for start in range(qmin, qmax + 1, _CHUNK):
        q = np.arange(start, min(qmax + 1, start + _CHUNK), dtype=np.float64)
        hit = np.nonzero(np.floor(fx1 * q + tol) >= np.ceil(fx0 * q - tol))[0]
        qs = q[hit]
        ok = np.floor(fy1 * qs + tol) >= np.ceil(fy0 * qs - tol)
        for v in qs[ok]:
            yield int(v)


def rationals_in_rect(r: Rect, qmin: int, qmax: int, reduced: bool = True) -> List[RatPoint]:
    """All p/q in the closed ``r`` intersected with the unit square, ``qmin <= q <= qmax``."""
    qmin = max(1, qmin)
    if qmax < qmin:
        return []
    box = clamp_unit(r)
    if box is None:
        return []
    x0, x1, y0, y1 = box.bounds
    out = []
    for q in _candidate_qs(x0, x1, y0, y1, qmin, qmax):
        a1, b1 = _ceil(x0, q), _floor(x1, q)
        if a1 > b1:
            continue
        a2, b2 = _ceil(y0, q), _floor(y1, q)
        if a2 > b2:
            continue
        for p1 in range(a1, b1 + 1):
            g1 = math.gcd(p1, q)
            for p2 in range(a2, b2 + 1):
                if reduced and math.gcd(g1, p2) != 1:
                    continue
                out.append(RatPoint(p1, p2, q))
    out.sort(key=lambda p: p.key)
    return out


def rationals_on_line(l: Line, within: Rect, qmin: int, qmax: int, reduced: bool = True) -> List[RatPoint]:
    """Rational points on ``l`` inside ``within``, via the parametrised
    solutions of ``a*p1 + b*p2 = c*q``."""
    qmin = max(1, qmin)
    box = clamp_unit(within)
    if box is None or qmax < qmin:
        return []
    x0, x1, y0, y1 = box.bounds
    a, b, c = l.a, l.b, l.c
    g = math.gcd(a, b)
    out = []
    for q in range(qmin, qmax + 1):
        lo1, hi1 = _ceil(x0, q), _floor(x1, q)
        lo2, hi2 = _ceil(y0, q), _floor(y1, q)
        if lo1 > hi1 or lo2 > hi2 or (c * q) % g:
            continue
        if b == 0:
            if (c * q) % a:
                continue
            p1 = c * q // a
            sols = [(p1, p2) for p2 in range(lo2, hi2 + 1)] if lo1 <= p1 <= hi1 else []
        elif a == 0:
            if (c * q) % b:
                continue
            p2 = c * q // b
            sols = [(p1, p2) for p1 in range(lo1, hi1 + 1)] if lo2 <= p2 <= hi2 else []
        else:
            # p1 = s + (b/g) k,  p2 = u - (a/g) k
            _, xa, _ = _egcd(abs(a), abs(b))
            if a < 0:
                xa = -xa
            s = xa * (c * q // g)
            u = (c * q - a * s) // b
            bg, ag = b // g, a // g
            klo, khi = _k_range(s, bg, lo1, hi1)
            k2lo, k2hi = _k_range(u, -ag, lo2, hi2)
            klo, khi = max(klo, k2lo), min(khi, k2hi)
            sols = [(s + bg * k, u - ag * k) for k in range(klo, khi + 1)]
        for p1, p2 in sols:
            if reduced and math.gcd(math.gcd(p1, p2), q) != 1:
                continue
            out.append(RatPoint(p1, p2, q))
    out.sort(key=lambda p: p.key)
    return out


def _egcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k = a // b
        a, b = b, a - k * b
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    return a, x0, y0


def _k_range(base, step, lo, hi):
    """Integers k with lo <= base + step*k <= hi (step != 0)."""
    if step > 0:
        return _ceil_div(lo - base, step), (hi - base) // step
    step = -step
    return _ceil_div(base - hi, step), (base - lo) // step


def _ceil_div(n, d):
    return -((-n) // d)


def collinear(points: Iterable[RatPoint]) -> Union[Line, None, _Empty]:
    """Common line of the points, ``None`` if they are not collinear,
    :data:`EMPTY` for no points.  One point gets the horizontal line."""
    pts = []
    seen = set()
    for p in points:
        xy = p.xy
        if xy not in seen:
            seen.add(xy)
            pts.append(xy)
    if not pts:
        return EMPTY
    if len(pts) == 1:
        return Line.horizontal(pts[0][1])
    line = Line.through(pts[0], pts[1])
    if all(line.contains(p) for p in pts[2:]):
        return line
    return None


def dirichlet_witnesses(x: Vec, exponents: Vec, qmax: int) -> List[RatPoint]:
    """Reduced p/q, q <= qmax, with ``|x_i - p_i/q| < q**-rho_i`` for both i."""
    x = (rat(x[0]), rat(x[1]))
    rho = (rat(exponents[0]), rat(exponents[1]))
    out = []
    for q in range(1, qmax + 1):
        cands = []
        for i in (0, 1):
            c = set()
            base = _floor(x[i], q)
            for p in (base - 1, base, base + 1, base + 2):
                if 0 <= p <= q:
                    err = abs(x[i] * q - p)
                    # |x q - p| < q**(1 - rho)
                    if err == 0 or power_lt([(err, 1)], [(Fraction(q), 1 - rho[i])]):
                        c.add(p)
            cands.append(sorted(c))
        for p1 in cands[0]:
            for p2 in cands[1]:
                if math.gcd(math.gcd(p1, p2), q) == 1:
                    out.append(RatPoint(p1, p2, q))
    out.sort(key=lambda p: p.key)
    return out


def in_rect(p: RatPoint, r: Rect) -> bool:
    return rect_chebyshev_contains(r, p.xy)
