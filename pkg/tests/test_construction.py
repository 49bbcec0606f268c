import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from badapprox.construction import (ConstructionParams, ExponentPair, WeightPair, avoidance_check,
                                    build_level, choose_base, choose_exponents, hyperplane_of_cell,
                                    initial_state, leading_rationals, nested_survivor_for,
                                    delta_bound_violations, survives)
from badapprox.errors import ConfigError, DegenerateWindow, OutOfWindow
from badapprox.geometry import Line, Rect, rect_contains, slab_meets_rect
from badapprox.pipeline import avoidance_targets
from badapprox.rationals import EMPTY, rationals_in_rect

W = WeightPair(1, 1)
P = ConstructionParams(W, ExponentPair(F(3, 2), F(3, 2)), 4, 4)
SMALL = Rect.from_bounds(F(5, 16), F(11, 32), F(17, 64), F(19, 64))


@pytest.fixture(scope="module")
def states():
    s = initial_state(P, SMALL, 3)
    out = [s]
    for _ in range(3):
        s = build_level(s)
        out.append(s)
    return out


def test_choose_exponents_examples():
    assert choose_exponents(W) == ExponentPair(F(3, 2), F(3, 2))
    assert choose_exponents(WeightPair(F(3, 5), F(3, 5))) == ExponentPair(F(3, 2), F(3, 2))
    assert choose_exponents(WeightPair(2, F(2, 5))) == ExponentPair(F(13, 8), F(11, 8))


def test_choose_base_examples():
    assert choose_base(ExponentPair(F(3, 2), F(3, 2))) == (4, 4)
    assert choose_base(ExponentPair(F(13, 8), F(11, 8))) == (256, 256)
    assert choose_base(ExponentPair(2, 1), 5) == (5, 3)


@pytest.mark.parametrize("tau", [(1, 2), (F(1, 2), F(1, 2)), (0, 3), (2, 0)])
def test_bad_weights(tau):
    with pytest.raises(ConfigError):
        WeightPair(*tau)


def test_bad_params():
    with pytest.raises(ConfigError):
        ExponentPair(2, 2)
    with pytest.raises(ConfigError):
        ConstructionParams(W, ExponentPair(F(3, 2), F(3, 2)), 2, 4)  # 2^(3/2) irrational
    with pytest.raises(ConfigError):
        ConstructionParams(W, ExponentPair(F(3, 2), F(3, 2)), 4, 1)


def test_default_constants():
    assert P.ell(1) == (4, 4) and P.ell(3) == (7, 7)
    assert P.delta(1) == (F(1, 32768), F(1, 32768))
    assert P.cN == (F(1, 2 ** 15), F(1, 2 ** 15))
    assert P.c1 == F(1, 4 ** 15)
    assert P.C1 == 5153960755200
    assert P.eps_prime == F(1, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_grid_counts_and_nesting(n):
    g = P.host_grid(n)
    assert g.counts == (8 * 8 ** n, 8 * 8 ** n)
    assert P.host_grid(n + 1).counts[0] % g.counts[0] == 0
    cell = g.cell(3, 5)
    assert cell.area == g.side[0] * g.side[1]
    # the ell grid refines the host grid
    assert P.ell_grid(n).counts[0] % g.counts[0] == 0


@pytest.mark.parametrize("n", [1, 2, 4])
def test_delta_identity(n):
    # delta_i(n) = c_i(N) * N^{-(n-1)(1+tau_i)}
    assert P.delta(n)[0] == P.cN[0] / F(4) ** (2 * (n - 1))


def test_hyperplane_of_cell():
    # corner host cell at level 1: (0,0) and (1/2,0) both lie on x2 = 0
    assert hyperplane_of_cell(P, Rect.from_bounds(0, F(1, 2), 0, F(1, 64)), 1) == Line.horizontal(0)
    # cell around 1/2 holding only (1/2, 1/2) at q < 4
    c = Rect((F(1, 2), F(1, 2)), (F(1, 100), F(1, 100)))
    assert rationals_in_rect(c, 1, 3) == rationals_in_rect(c, 2, 2)
    line = hyperplane_of_cell(P, c, 1)
    assert line.contains((F(1, 2), F(1, 2)))
    empty = Rect((F(1, 2) + F(1, 10), F(1, 2) + F(1, 10)), (F(1, 1000), F(1, 1000)))
    assert hyperplane_of_cell(P, empty, 1) is EMPTY


def _naive_survives(state, p):
    for k in range(1, state.level + 1):
        g = P.ell_grid(k)
        (i, j), = g.cells_containing(p)
        cell = g.cell(i, j)
        if any(slab_meets_rect(s, cell) for s in state.slabs_at(k)):
            return False
    return True


def _generic_point(rng, w):
    return tuple(w.lo(i) + F(rng.randrange(1, 10 ** 7), 10 ** 7 + 19) * 2 * w.halfwidth[i] for i in (0, 1))


def test_survives_against_naive_scan(states):
    rng = random.Random(3)
    s = states[2]
    for _ in range(10000):
        p = _generic_point(rng, SMALL)
        assert survives(s, p) == _naive_survives(s, p)


def test_survivor_sets_decrease(states):
    rng = random.Random(5)
    for _ in range(500):
        p = _generic_point(rng, SMALL)
        alive = [survives(s, p) for s in states]
        assert alive[0]
        assert all(a >= b for a, b in zip(alive, alive[1:]))


def test_avoidance(states):
    s = states[3]
    pts = avoidance_targets(s, 3)
    assert pts and all(avoidance_check(s, p) for p in pts)


def test_half_delta_fault_breaks_avoidance():
    w = Rect.from_bounds(0, F(1, 64), 0, F(1, 64))
    s = initial_state(P, w, 2, fault="half-delta")
    s = build_level(build_level(s))
    assert not all(avoidance_check(s, p) for p in avoidance_targets(s, 2))


def test_leading_rationals(states):
    s = states[3]
    lead = leading_rationals(s)
    assert lead
    keys = [lr.point.key for lr in lead]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    for lr in lead:
        assert P.N ** (lr.level - 1) <= lr.point.q < P.N ** lr.level or lr.level == 1
        assert lr.host_line.contains(lr.point.xy)
    assert delta_bound_violations(s) == []


def test_nested_survivor(states):
    s = states[3]
    deep = [lr for lr in leading_rationals(s) if lr.level >= 2]
    assert deep
    for lr in deep[:20]:
        cell = nested_survivor_for(s, lr, (F(1, 2), F(1, 3)))
        shrink = Rect(lr.point.xy, P.shrink_halfwidth(lr.point.q))
        assert rect_contains(shrink, cell)
        assert cell.area >= P.c1 * shrink.area


def test_degenerate_and_out_of_window(states):
    with pytest.raises(DegenerateWindow):
        initial_state(P, Rect((F(1, 3), F(1, 3)), (F(1, 10 ** 9), F(1, 10 ** 9))), 3)
    with pytest.raises(DegenerateWindow):
        initial_state(P, Rect((F(3), F(3)), (F(1, 2), F(1, 2))), 1)
    with pytest.raises(OutOfWindow):
        survives(states[1], (F(9, 10), F(9, 10)))


@settings(max_examples=30, deadline=None)
@given(st.fractions(min_value=F(1, 20), max_value=3, max_denominator=20),
       st.fractions(min_value=F(1, 20), max_value=3, max_denominator=20))
def test_exponent_choice_valid(a, b):
    t1, t2 = max(a, b), min(a, b)
    if t1 + t2 <= 1:
        return
    e = choose_exponents(WeightPair(t1, t2))
    assert e.rho1 + e.rho2 == 3 and e.rho1 >= e.rho2 >= 1
    assert e.eps_prime(WeightPair(t1, t2)) > 0
