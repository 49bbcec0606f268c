"""Greedy Vitali selection of enlarged rectangles and the density-guaranteed
subfamily chosen inside a survivor cell.

Enlarged rectangles have irrational half-widths ``3 q**-rho``.  Disjointness
is first screened with floats padded by a safe margin; anything the screen
cannot settle is decided exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from .construction import C2, ConstructionParams, ExponentPair, LeadingRational, LevelState
from .errors import DensityShortfall, PreconditionError
from .geometry import Rect, rect_contains, rect_intersects, rect_scale, rect_strictly_inside
from .rationals import RatPoint
from .surd import power, to_float

log = logging.getLogger(__name__)

_MARGIN = 1e-15


@dataclass(frozen=True)
class EnlargedRect:
    center: RatPoint
    rect: Rect
    seq_index: int
    level: int = 0
    fbox: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def make(cls, center: RatPoint, rho, seq_index: int, level: int = 0) -> "EnlargedRect":
        hw = tuple(power(center.q, -rho[i], 3) for i in (0, 1))
        rect = Rect(center.xy, hw)
        c = [to_float(v) for v in center.xy]
        h = [to_float(v) for v in hw]
        fbox = (c[0] - h[0], c[0] + h[0], c[1] - h[1], c[1] + h[1])
        return cls(center, rect, seq_index, level, fbox)

    @property
    def q(self) -> int:
        return self.center.q

    def area(self) -> Fraction:
        """Exact: ``36 q**-(rho1+rho2)`` is rational because rho1 + rho2 = 3."""
        a = self.rect.area
        return a if isinstance(a, Fraction) else Fraction(a.rational)


def enumerate_R_sequence(leading: Sequence[LeadingRational], exps: ExponentPair) -> List[EnlargedRect]:
    ordered = sorted(leading, key=lambda lr: lr.point.key)
    return [EnlargedRect.make(lr.point, (exps.rho1, exps.rho2), k, lr.level) for k, lr in enumerate(ordered, 1)]


def _maybe_meet(a: EnlargedRect, b: EnlargedRect) -> bool:
    fa, fb = a.fbox, b.fbox
    return not (fa[1] + _MARGIN < fb[0] or fb[1] + _MARGIN < fa[0]
                or fa[3] + _MARGIN < fb[2] or fb[3] + _MARGIN < fa[2])


def disjoint(a: EnlargedRect, b: EnlargedRect) -> bool:
    return not _maybe_meet(a, b) or not rect_intersects(a.rect, b.rect)


def vitali_select(v: Sequence[EnlargedRect]) -> List[EnlargedRect]:
    """Keep each rectangle that misses every rectangle kept before it."""
    for a, b in zip(v, v[1:]):
        if (a.q, a.center.p1, a.center.p2) > (b.q, b.center.p1, b.center.p2):
            raise PreconditionError("vitali_select needs rectangles ordered by nondecreasing denominator")
    kept: List[EnlargedRect] = []
    # bucket kept rectangles on a coarse float grid for the screen
    cells = {}
    for r in v:
        if not kept:
            kept.append(r)
            _index(cells, r)
            continue
        clash = False
        for other in _neighbours(cells, r):
            if _maybe_meet(r, other) and rect_intersects(r.rect, other.rect):
                clash = True
                break
        if not clash:
            kept.append(r)
            _index(cells, r)
    return kept


# Kept rectangles are registered on every coarse cell they touch, with the
# cell size fixed by the first (largest) one, so later rectangles touch few cells.
def _scale_for(r: EnlargedRect) -> float:
    return max(r.fbox[1] - r.fbox[0], r.fbox[3] - r.fbox[2])


def _index(cells, r: EnlargedRect):
    if "scale" not in cells:
        cells["scale"] = _scale_for(r) or 1e-300
    s = cells["scale"]
    for key in _keys(r, s):
        cells.setdefault(key, []).append(r)


def _keys(r: EnlargedRect, s: float):
    f = r.fbox
    i0, i1 = int((f[0] - _MARGIN) // s), int((f[1] + _MARGIN) // s)
    j0, j1 = int((f[2] - _MARGIN) // s), int((f[3] + _MARGIN) // s)
    if (i1 - i0 + 1) * (j1 - j0 + 1) > 4096:
        return [("all",)]
    return [(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)]


def _neighbours(cells, r: EnlargedRect):
    seen = set()
    s = cells["scale"]
    keys = _keys(r, s) + [("all",)]
    for key in keys:
        for other in cells.get(key, ()):
            if id(other) not in seen:
                seen.add(id(other))
                yield other


@dataclass
class Selection:
    """Outcome of one density-guaranteed selection inside a host cell."""

    family: List[EnlargedRect]
    ratio: Fraction
    pool: int
    vitali: int
    shortfall: bool = False


def admissible(state: LevelState, host: Rect, host_level: int, seq: Sequence[EnlargedRect], G: int) -> List[EnlargedRect]:
    """Rectangles of index >= G inside ``host`` that meet a survivor one
    level down lying strictly inside ``host``."""
    out = []
    k = host_level + 1
    grid = state.params.ell_grid(k)
    for r in seq:
        if r.seq_index < G or not rect_contains(host, r.rect):
            continue
        rng = grid.index_range(r.rect)
        if rng is None:
            continue
        i0, i1, j0, j1 = rng
        hit = False
        for j in range(j0, j1 + 1):
            for i in range(i0, i1 + 1):
                cell = grid.cell(i, j)
                if rect_strictly_inside(host, cell) and rect_intersects(cell, r.rect) and state.cell_survives(k, i, j):
                    hit = True
                    break
            if hit:
                break
        if hit:
            out.append(r)
    return out


def truncate(family: Sequence[EnlargedRect], host_area: Fraction, rule: str = "full") -> List[EnlargedRect]:
    """Finite prefix of the disjoint family.

    ``"full"`` keeps all of it (the family is already finite here);
    ``"target"`` keeps the shortest prefix reaching the ``c2`` share of the host;
    ``"half"`` keeps the shortest prefix holding half of the family's area
    and the ``c2`` share of the host.
    """
    if rule == "full":
        return list(family)
    total = sum((r.area() for r in family), Fraction(0))
    if rule == "target":
        target = C2 * host_area
    elif rule == "half":
        target = max(total / 2, C2 * host_area)
    else:
        raise PreconditionError(f"unknown prefix rule {rule!r}")
    acc = Fraction(0)
    for k, r in enumerate(family):
        acc += r.area()
        if acc >= target:
            return list(family[:k + 1])
    return list(family)


def t_select(state: LevelState, host: Rect, G: int, seq: Sequence[EnlargedRect], host_level: int,
             strict: bool = False, rule: str = "full") -> Selection:
    pool = admissible(state, host, host_level, seq, G)
    vit = vitali_select(pool)
    fam = truncate(vit, host.area, rule)
    got = sum((r.area() for r in fam), Fraction(0))
    ratio = got / host.area
    sel = Selection(fam, ratio, len(pool), len(vit), shortfall=ratio < C2)
    if sel.shortfall:
        msg = f"density {float(ratio):.3g} below 3/400 in host {host.to_json()} ({len(fam)} rectangles)"
        if strict or not fam:
            raise DensityShortfall(msg, ratio, fam)
        log.warning(msg)
    return sel
