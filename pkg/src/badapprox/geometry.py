"""Exact rational rectangles, lines and line neighbourhoods in the plane.

Rectangles are closed and described by centre and half side lengths, the
``Delta(x, eps)`` convention; the metric throughout is the sup norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import InvalidScale
from .exact import Vec, fmt, rat
from .surd import Surd


def _num(v):
    # rectangle coordinates may be symbolic (irrational half-widths)
    return v if isinstance(v, Surd) else rat(v)

Point = Tuple[Fraction, Fraction]


@dataclass(frozen=True, order=True)
class Rect:
    center: Vec
    halfwidth: Vec

    def __post_init__(self):
        c = (_num(self.center[0]), _num(self.center[1]))
        h = (_num(self.halfwidth[0]), _num(self.halfwidth[1]))
        if h[0] < 0 or h[1] < 0:
            raise ValueError("halfwidths must be nonnegative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "halfwidth", h)
        object.__setattr__(self, "_lo", (c[0] - h[0], c[1] - h[1]))
        object.__setattr__(self, "_hi", (c[0] + h[0], c[1] + h[1]))

    @classmethod
    def from_bounds(cls, x0, x1, y0, y1) -> "Rect":
        x0, x1, y0, y1 = map(_num, (x0, x1, y0, y1))
        return cls(((x0 + x1) / 2, (y0 + y1) / 2), ((x1 - x0) / 2, (y1 - y0) / 2))

    def lo(self, i: int) -> Fraction:
        return self._lo[i]

    def hi(self, i: int) -> Fraction:
        return self._hi[i]

    @property
    def bounds(self):
        return self.lo(0), self.hi(0), self.lo(1), self.hi(1)

    @property
    def area(self) -> Fraction:
        return 4 * self.halfwidth[0] * self.halfwidth[1]

    def expanded(self, pad: Vec) -> "Rect":
        return Rect(self.center, (self.halfwidth[0] + pad[0], self.halfwidth[1] + pad[1]))

    def to_json(self):
        return {"center": [fmt(c) for c in self.center], "halfwidth": [fmt(h) for h in self.halfwidth]}

    @classmethod
    def from_json(cls, d) -> "Rect":
        return cls(tuple(map(rat, d["center"])), tuple(map(rat, d["halfwidth"])))


UNIT_SQUARE = Rect.from_bounds(0, 1, 0, 1)


def rect_scale(r: Rect, a) -> Rect:
    a = _num(a)
    if a <= 0:
        raise InvalidScale(f"scale factor must be positive, got {a}")
    return Rect(r.center, (r.halfwidth[0] * a, r.halfwidth[1] * a))


def rect_intersects(r1: Rect, r2: Rect) -> bool:
    return all(r1.lo(i) <= r2.hi(i) and r2.lo(i) <= r1.hi(i) for i in (0, 1))


def rect_intersection(r1: Rect, r2: Rect) -> Optional[Rect]:
    if not rect_intersects(r1, r2):
        return None
    return Rect.from_bounds(max(r1.lo(0), r2.lo(0)), min(r1.hi(0), r2.hi(0)),
                            max(r1.lo(1), r2.lo(1)), min(r1.hi(1), r2.hi(1)))


def rect_contains(outer: Rect, inner: Rect) -> bool:
    return all(outer.lo(i) <= inner.lo(i) and inner.hi(i) <= outer.hi(i) for i in (0, 1))


def rect_strictly_inside(outer: Rect, inner: Rect) -> bool:
    """``inner`` lies in the open interior of ``outer``."""
    return all(outer.lo(i) < inner.lo(i) and inner.hi(i) < outer.hi(i) for i in (0, 1))


def rect_chebyshev_contains(r: Rect, p: Point) -> bool:
    return all(abs(_num(p[i]) - r.center[i]) <= r.halfwidth[i] for i in (0, 1))


def clamp_unit(r: Rect) -> Optional[Rect]:
    return rect_intersection(r, UNIT_SQUARE)


@dataclass(frozen=True, order=True)
class Line:
    """``a*x1 + b*x2 = c`` with coprime integer coefficients, (a, b) > 0 lexicographically."""

    a: int
    b: int
    c: int

    @classmethod
    def make(cls, a, b, c) -> "Line":
        a, b, c = rat(a), rat(b), rat(c)
        if a == 0 and b == 0:
            raise ValueError("degenerate line")
        den = 1
        for v in (a, b, c):
            den = den * v.denominator // math.gcd(den, v.denominator)
        ia, ib, ic = int(a * den), int(b * den), int(c * den)
        g = math.gcd(math.gcd(abs(ia), abs(ib)), abs(ic))
        ia, ib, ic = ia // g, ib // g, ic // g
        if ia < 0 or (ia == 0 and ib < 0):
            ia, ib, ic = -ia, -ib, -ic
        return cls(ia, ib, ic)

    @classmethod
    def through(cls, p: Point, q: Point) -> "Line":
        (x1, y1), (x2, y2) = p, q
        a, b = y2 - y1, x1 - x2
        return cls.make(a, b, a * x1 + b * y1)

    @classmethod
    def horizontal(cls, y) -> "Line":
        return cls.make(0, 1, y)

    def value(self, p: Point) -> Fraction:
        return self.a * rat(p[0]) + self.b * rat(p[1]) - self.c

    def contains(self, p: Point) -> bool:
        return self.value(p) == 0

    def to_json(self):
        return [str(self.a), str(self.b), str(self.c)]


@dataclass(frozen=True)
class SegmentNeighborhood:
    """The slab removed around a host cell's line: hull of the line's
    ``delta``-neighbourhood, cut down to five times the host cell."""

    line: Line
    host: Rect
    delta: Vec
    level: int

    @property
    def width(self) -> Fraction:
        return abs(self.line.a) * self.delta[0] + abs(self.line.b) * self.delta[1]

    @property
    def box(self) -> Rect:
        return rect_scale(self.host, 5)

    def to_json(self):
        return {"line": self.line.to_json(), "host": self.host.to_json(),
                "delta": [fmt(d) for d in self.delta], "level": self.level}


# --- polygons ---------------------------------------------------------------

def rect_polygon(r: Rect) -> List[Point]:
    x0, x1, y0, y1 = r.bounds
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def clip_halfplane(poly: Sequence[Point], a, b, c) -> List[Point]:
    """Keep the part of a convex polygon with ``a*x + b*y <= c``."""
    out: List[Point] = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def polygon_area(poly: Sequence[Point]) -> Fraction:
    n = len(poly)
    if n < 3:
        return Fraction(0)
    twice = sum(poly[k][0] * poly[(k + 1) % n][1] - poly[(k + 1) % n][0] * poly[k][1] for k in range(n))
    return abs(Fraction(twice)) / 2


def band_rect_area(line: Line, delta: Vec, r: Rect, upper_first: bool = True) -> Fraction:
    """Exact area of ``{|a x1 + b x2 - c| <= |a| d1 + |b| d2}`` inside ``r``."""
    w = abs(line.a) * rat(delta[0]) + abs(line.b) * rat(delta[1])
    cuts = [(line.a, line.b, line.c + w), (-line.a, -line.b, -(line.c - w))]
    if not upper_first:
        cuts.reverse()
    poly = rect_polygon(r)
    for a, b, c in cuts:
        poly = clip_halfplane(poly, a, b, c)
        if not poly:
            return Fraction(0)
    return polygon_area(poly)


def slab_rect_area(s: SegmentNeighborhood, r: Rect) -> Fraction:
    box = rect_intersection(r, s.box)
    if box is None:
        return Fraction(0)
    return band_rect_area(s.line, s.delta, box)


def slab_meets_rect(s: SegmentNeighborhood, r: Rect) -> bool:
    box = rect_intersection(r, s.box)
    if box is None:
        return False
    x0, x1, y0, y1 = box.bounds
    line = s.line
    vals = [line.a * x + line.b * y - line.c for x in (x0, x1) for y in (y0, y1)]
    w = s.width
    return min(vals) <= w and max(vals) >= -w


def slab_row_interval(s: SegmentNeighborhood, x0, x1, y0, y1) -> Optional[Tuple[Fraction, Fraction]]:
    """x-extent of the slab inside the rectangle ``[x0,x1] x [y0,y1]``.

    A grid cell spanning the full row height meets the slab iff its
    x-interval meets this extent.
    """
    b = s.box
    x0, x1 = max(x0, b.lo(0)), min(x1, b.hi(0))
    y0, y1 = max(y0, b.lo(1)), min(y1, b.hi(1))
    if x0 > x1 or y0 > y1:
        return None
    a, bb, c, w = s.line.a, s.line.b, s.line.c, s.width
    if a == 0:
        lo_v, hi_v = sorted((bb * y0 - c, bb * y1 - c))
        if lo_v <= w and hi_v >= -w:
            return (x0, x1)
        return None
    by_lo, by_hi = sorted((bb * y0, bb * y1))
    lo_ax, hi_ax = c - w - by_hi, c + w - by_lo
    if a > 0:
        xa, xb = lo_ax / a, hi_ax / a
    else:
        xa, xb = hi_ax / a, lo_ax / a
    xa, xb = max(xa, x0), min(xb, x1)
    if xa > xb:
        return None
    return (xa, xb)
