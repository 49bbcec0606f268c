import random
from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from badapprox.construction import C2, ConstructionParams, ExponentPair, WeightPair, build_to, initial_state
from badapprox.covering import EnlargedRect, enumerate_R_sequence, t_select, truncate, vitali_select
from badapprox.errors import DensityShortfall, PreconditionError
from badapprox.geometry import Rect, rect_contains, rect_intersects, rect_scale
from badapprox.pipeline import random_family, vitali_ok
from badapprox.rationals import RatPoint

RHO = (F(3, 2), F(3, 2))
P = ConstructionParams(WeightPair(1, 1), ExponentPair(*RHO), 4, 4)
SMALL = Rect.from_bounds(F(5, 16), F(11, 32), F(17, 64), F(19, 64))


def naive_greedy(v):
    kept = []
    for r in v:
        if all(not rect_intersects(r.rect, k.rect) for k in kept):
            kept.append(r)
    return kept


def er(p1, p2, q, k=1):
    return EnlargedRect.make(RatPoint(p1, p2, q), RHO, k)


def test_enlarged_rect_area_is_exact():
    r = er(1, 1, 2)
    assert r.area() == 36 * F(1, 8)
    assert er(1, 2, 5).area() == F(36, 125)


def test_vitali_examples():
    # (1/2,1/2) q=2 has half-width 3/2^(3/2) ~ 1.06 and swallows everything nearby
    fam = [er(1, 1, 2, 1), er(1, 1, 3, 2), er(2, 1, 3, 3)]
    assert vitali_select(fam) == [fam[0]]
    far = [er(1, 1, 50, 1), er(49, 49, 50, 2)]
    assert vitali_select(far) == far
    assert vitali_select([]) == []


def test_vitali_rejects_unsorted():
    with pytest.raises(PreconditionError):
        vitali_select([er(1, 1, 5, 1), er(1, 1, 2, 2)])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 30), st.integers(4, 200))
def test_vitali_properties(seed, size, qmax):
    fam = random_family(random.Random(seed), RHO, size, qmax)
    kept = vitali_select(fam)
    assert kept == naive_greedy(fam)
    for a, b in combinations(kept, 2):
        assert not rect_intersects(a.rect, b.rect)
    grown = [rect_scale(k.rect, 5) for k in kept]
    for r in fam:
        assert any(rect_contains(g, r.rect) for g in grown)
    assert vitali_select(kept) == kept
    assert vitali_ok(fam)


def test_enumerate_order():
    s = build_to(initial_state(P, SMALL, 2), 2)
    seq = enumerate_R_sequence(s.leading, P.exps)
    assert [r.seq_index for r in seq] == list(range(1, len(seq) + 1))
    keys = [r.center.key for r in seq]
    assert keys == sorted(keys)
    assert all(a.q <= b.q for a, b in zip(seq, seq[1:]))


def _fam():
    return [er(1, 1, 40, 1), er(3, 1, 40, 2), er(5, 1, 40, 3)]


def test_truncate_rules():
    fam = _fam()
    a = fam[0].area()
    assert truncate(fam, 1) == fam
    # host so large that the c2 share needs two rectangles
    host = (a + a / 2) / C2
    assert truncate(fam, host, "target") == fam[:2]
    assert truncate(fam, F(1, 10 ** 9), "half") == fam[:2]
    assert truncate(fam, 10 ** 9, "target") == fam
    with pytest.raises(PreconditionError):
        truncate(fam, 1, "bogus")


def test_t_select_beyond_sequence():
    s = build_to(initial_state(P, SMALL, 2), 2)
    seq = enumerate_R_sequence(s.leading, P.exps)
    host = Rect.from_bounds(F(5, 16), F(11, 32), F(17, 64), F(19, 64))
    with pytest.raises(DensityShortfall) as e:
        t_select(s, host, len(seq) + 1, seq, 1)
    assert e.value.ratio == 0 and e.value.family == []
