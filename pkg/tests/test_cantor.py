from fractions import Fraction as F
from itertools import combinations

import pytest

from badapprox.cantor import (ROOT_ANCHOR, CantorNode, DeepConfig, build_tree, condition_i_threshold,
                              condition_ii_threshold, init_root, layer_masses, mass_of_rect,
                              membership_witnesses, node_mass_bound_ok, separation_ok, tree_to_json)
from badapprox.construction import ConstructionParams, ExponentPair, WeightPair, build_to, initial_state
from badapprox.errors import ConstructionInfeasible
from badapprox.geometry import Rect, rect_contains, rect_intersects
from badapprox.rationals import RatPoint

P = ConstructionParams(WeightPair(1, 1), ExponentPair(F(3, 2), F(3, 2)), 4, 4)
SMALL = Rect.from_bounds(F(5, 16), F(11, 32), F(17, 64), F(19, 64))


@pytest.fixture(scope="module")
def state():
    return build_to(initial_state(P, SMALL, 1), 1)


@pytest.fixture(scope="module")
def tree(state):
    return build_tree(state, SMALL, 1, anchor=ROOT_ANCHOR)


def _node(q):
    c = RatPoint(1, 1, q)
    r = Rect(c.xy, P.shrink_halfwidth(q))
    return CantorNode(c, r, r, F(1), 1)


def test_condition_i_threshold_examples():
    # 4^-2 > 3 d^(-3/2)  <=>  d^(3/2) > 48
    assert condition_i_threshold(P, _node(4)) == 14
    root = CantorNode(None, SMALL, SMALL, F(1), 0)
    assert condition_i_threshold(P, root) == 3


def test_condition_ii_grows_with_mass_density():
    a, b = _node(4), _node(4)
    b.mass = F(1, 10 ** 6)
    assert condition_ii_threshold(P, b, F(1, 10)) <= condition_ii_threshold(P, a, F(1, 10))


def test_root(state):
    root = init_root(state, SMALL)
    assert root.level == 0 and root.mass == 1 and root.center is None
    assert root.shrink.halfwidth == (F(1, 2 ** 16), F(1, 2 ** 16))
    assert rect_contains(SMALL, root.shrink)
    anchored = init_root(state, SMALL, ROOT_ANCHOR)
    assert rect_contains(SMALL, anchored.shrink)


def test_root_infeasible(state):
    tiny = Rect((F(1, 3), F(1, 3)), (F(1, 10 ** 6), F(1, 10 ** 6)))
    with pytest.raises(ConstructionInfeasible):
        init_root(state, tiny)


def test_depth1_tree_masses(tree):
    assert tree.depth == 1
    kids = tree.deepest
    assert kids and tree.root.children == kids
    assert layer_masses(tree) == [1, 1]
    total = sum((r.area() for r in tree.selections[0].rects), F(0))
    for node, r in zip(kids, tree.selections[0].rects):
        assert node.mass == r.area() / total
        assert node.center == r.center


def test_depth1_tree_geometry(tree):
    host = tree.root.nested_survivor
    kids = tree.deepest
    for a in kids:
        assert rect_contains(host, a.enlargement)
        assert rect_contains(a.enlargement, a.shrink)
        assert rect_contains(a.shrink, a.nested_survivor)
    for a, b in combinations(kids, 2):
        assert not rect_intersects(a.enlargement, b.enlargement)
        assert separation_ok(tree, a, b)
    assert all(node_mass_bound_ok(tree, n) for n in kids)


def test_mass_of_rect(tree):
    assert mass_of_rect(tree, tree.root.shrink) == 1
    far = Rect((F(9, 10), F(1, 10)), (F(1, 100), F(1, 100)))
    assert mass_of_rect(tree, far) == 0
    a = tree.deepest[0]
    assert mass_of_rect(tree, a.nested_survivor) >= a.mass


def test_membership(tree):
    for a in tree.deepest:
        assert membership_witnesses(tree, a.center.xy) == [a]
    assert membership_witnesses(tree, (F(9, 10), F(1, 10))) == []


def test_unnormalized_fault_breaks_conservation(state):
    t = build_tree(state, SMALL, 1, cfg=DeepConfig(fault="unnormalized-mass"), anchor=ROOT_ANCHOR)
    assert layer_masses(t)[1] != 1


def test_json_shape(tree):
    d = tree_to_json(tree)
    assert len(d["nodes"]) == 1 + len(tree.deepest)
    assert d["nodes"][0]["parent_index"] is None
    assert all(n["parent_index"] == 0 for n in d["nodes"][1:])
    assert d["layers"][1]["mass"] == "1/1"
    c = tree.deepest[0].center
    assert d["nodes"][1]["center"] == [str(c.p1), str(c.p2), str(c.q)]
