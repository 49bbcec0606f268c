"""Hoelder experiment, certificate and ledger on the shared default build."""

from fractions import Fraction as F

import pytest

from badapprox.analysis import (ball_bound_ok, certificate_constant, holder_experiment, local_retention,
                                mass_distribution_certificate, measure_ledger)
from badapprox.cantor import MassTree
from badapprox.errors import InsufficientData, PreconditionError

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def tree(default_run) -> MassTree:
    return default_run.tree


def test_deterministic(tree):
    a = holder_experiment(tree, 200, seed=4)
    b = holder_experiment(tree, 200, seed=4)
    assert a.fitted_slope == b.fitted_slope and a.points == b.points


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_stable_under_doubling(tree, seed):
    a = holder_experiment(tree, 1600, seed=seed)
    b = holder_experiment(tree, 3200, seed=seed)
    assert abs(a.fitted_slope - b.fitted_slope) <= 0.05


def test_explicit_range(tree):
    hw = min(tree.root.shrink.halfwidth)
    rep = holder_experiment(tree, 200, hw / 10 ** 6, hw, seed=2)
    lo, hi = rep.r_range
    assert float(hw) / 10 ** 6 <= lo <= hi <= float(hw)


def test_preconditions(tree, default_run):
    hw = min(tree.root.shrink.halfwidth)
    with pytest.raises(PreconditionError):
        holder_experiment(tree, 100, r_lo=hw / 2)
    with pytest.raises(PreconditionError):
        holder_experiment(tree, 100, hw / 2, 2 * hw)
    with pytest.raises(PreconditionError):
        holder_experiment(tree, 100, hw, hw / 2)
    shallow = MassTree(tree.root, tree.params, tree.epsilon, tree.layers[:2])
    with pytest.raises(PreconditionError):
        holder_experiment(shallow, 100)
    with pytest.raises(InsufficientData):
        holder_experiment(tree, 5)


def test_ball_bound_exact():
    assert ball_bound_ok(F(1, 4), F(1, 4), 1, 1)
    assert not ball_bound_ok(F(1, 2), F(1, 4), F(1, 2), F(99, 100))  # 1/2 vs (1/4)^(1/2) * 99/100
    assert ball_bound_ok(F(1, 2), F(1, 4), F(1, 2), 1)
    assert ball_bound_ok(0, F(1, 4), 5, F(1, 10 ** 9))


def test_certificate(tree):
    rep = holder_experiment(tree, 300, seed=3)
    r_o = max(r for _, _, r, _ in rep.points)
    alpha = F(1)
    C = certificate_constant(rep, alpha)
    assert mass_distribution_certificate(tree, alpha, r_o, C, report=rep)
    assert mass_distribution_certificate(tree, 0, r_o, 1, report=rep)
    assert not mass_distribution_certificate(tree, 40, r_o, 1, report=rep)
    assert not mass_distribution_certificate(tree, alpha, r_o, C / 2, report=rep)


def test_ledger(default_run):
    rows = measure_ledger(default_run.state)
    assert [r.level for r in rows] == [1, 2, 3]
    assert all(r.ok and r.cumulative_ok for r in rows)
    assert rows[2].cumulative == sum(r.removed for r in rows)
    assert 0 < rows[0].removed < 1


def test_local_retention(default_run):
    s = default_run.state
    v = local_retention(s, 1, 700, 900, 2)
    assert 0 <= v <= 1
    with pytest.raises(PreconditionError):
        local_retention(s, 2, 0, 0, 2)
