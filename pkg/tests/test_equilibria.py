import math

import numpy as np
import pytest

from netinvest.equilibria import (
    inefficiency, optimal_total_profit, own_profit, poa_formula_homogeneous, poa_formula_powerlaw,
    ppoa_formula_powerlaw, scalar_welfare, social_optimum, spne, spne_homogeneous, spne_powerlaw,
)
from netinvest.errors import ClosedFormMismatch, DivergentWelfare, UnsupportedReservation
from netinvest.market import reduced_profit
from netinvest.wardrop import Homogeneous, PiecewiseLinear, PowerLaw

from conftest import three_branch


def grid_best_response(k, res, others, hi, n=400001):
    """Vectorized dense-grid oracle for one provider's best reply."""
    x = np.linspace(0.0, hi, n)
    tot = x + others
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(res, Homogeneous):
            val = k * x * (np.minimum(res.R ** 2 / k ** 2, res.d ** 2 / tot ** 2) - 1)
        else:
            a = res.alpha
            val = x * (tot ** (-2 / (a + 1)) * k ** ((1 - a) / (a + 1)) - k)
    val = np.where(x > 0, val, 0.0)
    return float(val.max())


def test_paper_example_interval():
    rep = spne_homogeneous(1, 2, 2.0, 1.0)
    assert rep.kind == "interval-set" and rep.case == "kink"
    assert rep.total == pytest.approx(0.5)
    assert rep.bounds == pytest.approx((3 / 16, 5 / 16))


def test_negative_margin():
    rep = spne_homogeneous(2, 3, 1.0, 5.0)
    assert rep.case == "negative-margin" and rep.investments == (0.0, 0.0, 0.0)


def test_zero_margin_set():
    rep = spne_homogeneous(2, 3, 2.0, 5.0)
    assert rep.kind == "all-below-threshold" and rep.total_bounds == (0.0, 5.0)


def test_interior_point_and_grid_oracle():
    rep = spne_homogeneous(1, 4, 2.0, 1.0)
    assert rep.case == "interior"
    assert rep.investments == pytest.approx((math.sqrt(2 / 64),) * 4, abs=1e-12)
    assert rep.total == pytest.approx(0.7071068, abs=1e-7)
    b = rep.investments[0]
    res = Homogeneous(2.0, 1.0)
    best = grid_best_response(1, res, 3 * b, 3.0)
    assert best <= own_profit(b, 3 * b, 1, res) + 1e-9


def test_monopoly_homogeneous():
    rep = spne_homogeneous(2, 1, 3.0, 1.5)
    assert rep.case == "monopoly" and rep.investments == pytest.approx((1.0,))


def test_boundary_case():
    # sqrt((n-2)/n) = k/R with n=4, R=k*sqrt(2)
    rep = spne_homogeneous(1, 4, math.sqrt(2.0), 1.0)
    assert rep.case == "boundary"
    assert rep.investments[0] == pytest.approx(1 / (4 * math.sqrt(2)))
    assert rep.investments[0] == pytest.approx(math.sqrt(2 / 64))


@pytest.mark.parametrize("k,n,R,d", [(1, 3, 1.2, 1), (2, 5, 2.5, 3), (1, 2, 5, 1), (3, 6, 3.1, 2)])
def test_kink_set_members_are_equilibria(k, n, R, d):
    rep = spne_homogeneous(k, n, R, d)
    assert rep.kind == "interval-set"
    lo, hi = rep.bounds
    assert hi == pytest.approx(rep.total - (n - 1) * lo)
    res = Homogeneous(R, d)
    rng = np.random.default_rng(7)
    for _ in range(5):
        point = lo + (rep.total - n * lo) * rng.dirichlet(np.ones(n))
        assert point.sum() == pytest.approx(rep.total)
        for i in range(n):
            others = point.sum() - point[i]
            assert grid_best_response(k, res, others, 3 * rep.total, 100001) <= own_profit(point[i], others, k, res) + 1e-9


def test_kink_set_is_tight():
    # just below the lower bound, the provider prefers to move
    k, n, R, d = 1, 2, 2.0, 1.0
    rep = spne_homogeneous(k, n, R, d)
    lo = rep.bounds[0] * 0.9
    others = rep.total - lo
    res = Homogeneous(R, d)
    assert grid_best_response(k, res, others, 2.0) > own_profit(lo, others, k, res) + 1e-6


def test_powerlaw_examples():
    assert spne_powerlaw(1, 1, 3.0).investments == pytest.approx((0.25,))
    assert not spne_powerlaw(1, 1, 1.0).exists
    assert not spne_powerlaw(1, 1, 0.5).exists
    assert spne_powerlaw(1, 2, 3.0).investments == pytest.approx((0.28125, 0.28125))


@pytest.mark.parametrize("k,n,alpha", [(1, 2, 0.5), (2, 3, 1.0), (3, 5, 2.0), (1, 1, 1.5)])
def test_powerlaw_grid_oracle(k, n, alpha):
    rep = spne_powerlaw(k, n, alpha)
    b = rep.investments[0]
    res = PowerLaw(alpha)
    others = (n - 1) * b
    assert grid_best_response(k, res, others, 4 * n * b + 1) <= own_profit(b, others, k, res) + 1e-9
    assert reduced_profit(rep.investments, k, res).profits == pytest.approx(rep.profits)


def test_spne_dispatch():
    assert spne(1, 2, Homogeneous(2, 1)).case == "kink"
    with pytest.raises(UnsupportedReservation):
        spne(1, 2, PiecewiseLinear(((0, 1), (1, 0))))
    with pytest.raises(ValueError):
        spne_powerlaw(0, 2, 1.0)


def test_social_optimum_examples():
    opt = social_optimum(1, Homogeneous(2, 1))
    assert (opt.total, opt.value) == pytest.approx((0.5, 1.5))
    assert social_optimum(2, Homogeneous(2, 1)) == social_optimum(2, Homogeneous(1, 1))
    assert social_optimum(2, Homogeneous(2, 1)).value == 0.0
    opt = social_optimum(1, PowerLaw(3))
    assert (opt.total, opt.value) == pytest.approx((0.5625, 0.5625))
    # independent grid maximization
    xs = np.linspace(1e-6, 3, 30001)
    best = max(scalar_welfare(x, 1, PowerLaw(3)) for x in xs)
    assert best == pytest.approx(0.5625, abs=1e-7)
    with pytest.raises(DivergentWelfare):
        social_optimum(1, PowerLaw(1.0))


def test_optimal_profit():
    assert optimal_total_profit(1, Homogeneous(2, 1)).value == pytest.approx(1.5)
    assert optimal_total_profit(1, PowerLaw(0.5)).value == math.inf
    assert optimal_total_profit(1, PowerLaw(1.0)).value == 1.0
    assert optimal_total_profit(1, PowerLaw(3.0)).value == pytest.approx(0.25)


def test_inefficiency_examples():
    rep = inefficiency(1, 4, Homogeneous(2, 1))
    # optimum SW = 2 - 1/2, equilibrium SW = 2 - sqrt(1/2)
    assert rep.poa == pytest.approx(1.5 / (2 - math.sqrt(0.5)), rel=1e-12)
    assert rep.poa == pytest.approx(3 / (4 - math.sqrt(2)), rel=1e-12)
    assert rep.ppoa == pytest.approx(2.1213203, abs=1e-6)
    assert rep.recomputed_poa == pytest.approx(rep.poa, rel=1e-9)
    assert inefficiency(1, 2, PowerLaw(2.7)).poa == pytest.approx(1.0, abs=1e-12)
    assert inefficiency(1, 2, PowerLaw(3)).ppoa == pytest.approx(4 / 3, abs=1e-12)


def test_inefficiency_on_bigger_tree():
    rep = inefficiency(2, 4, Homogeneous(3, 1), tree=three_branch(2))
    assert rep.recomputed_poa == pytest.approx(rep.poa, rel=1e-9)
    assert rep.recomputed_ppoa == pytest.approx(rep.ppoa, rel=1e-9)
    with pytest.raises(ValueError):
        inefficiency(1, 4, Homogeneous(3, 1), tree=three_branch(2))


def test_inefficiency_divergent_branch():
    rep = inefficiency(1, 3, PowerLaw(0.5))
    assert rep.poa is None and rep.ppoa == math.inf
    rep = inefficiency(1, 1, PowerLaw(1.0))
    assert rep.ppoa == math.inf and rep.eq_profit is None
    assert inefficiency(1, 7, PowerLaw(1.0)).ppoa == 7.0


def test_homogeneous_degenerate_branches():
    assert poa_formula_homogeneous(1, 4, 0.5, 1) == (1.0, 1.0)
    assert poa_formula_homogeneous(1, 2, 2.0, 1) == (1.0, 1.0)
    rep = inefficiency(2, 3, Homogeneous(1.0, 4.0))
    assert rep.poa == rep.ppoa == 1.0
    assert inefficiency(1, 4, Homogeneous(2.0, 0.0)).poa == 1.0


def test_ratio_ordering(rng):
    for _ in range(40):
        k, n = int(rng.integers(1, 4)), int(rng.integers(1, 8))
        res = Homogeneous(float(rng.uniform(0.5, 6)), float(rng.uniform(0.1, 3)))
        rep = inefficiency(k, n, res)
        assert rep.poa >= rep.pos >= 1 - 1e-12
        assert rep.ppoa >= rep.ppos >= 1 - 1e-12


def test_powerlaw_ratio_formulas():
    assert poa_formula_powerlaw(2, 5.0) == pytest.approx(1.0)
    assert ppoa_formula_powerlaw(3, 0.9) == math.inf
    assert ppoa_formula_powerlaw(1, 2.0) == 1.0


def test_mismatch_is_loud(monkeypatch):
    import netinvest.equilibria as eq
    monkeypatch.setattr(eq, "poa_formula_powerlaw", lambda n, a: 1.5)
    with pytest.raises(ClosedFormMismatch):
        eq.inefficiency(1, 3, PowerLaw(2.0))
