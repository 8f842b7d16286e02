import math

import numpy as np
import pytest

from netinvest.errors import DivergentWelfare, EmptyInvestment, NonMonotoneReservation, PreconditionViolated
from netinvest.sp_graph import edge, enumerate_paths, flatten, parallel, random_tree, series
from netinvest.verify import beckmann_oracle
from netinvest.wardrop import (
    Homogeneous, PiecewiseLinear, PowerLaw, compose_slope, edge_flows, path_costs,
    path_flow_decomposition, reservation_from_dict, reservation_to_dict, solve_demand, wardrop_outcome,
)


def bisect_root(g, lo, hi, iters=200):
    """Independent root finder for g decreasing through 0 on [lo, hi]."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if g(mid) > 0 else (lo, mid)
    return 0.5 * (lo + hi)


def test_slope_examples():
    assert compose_slope(edge("e"), {"e": 1.0}) == 1.0
    assert compose_slope(series(edge("a"), edge("b")), {"a": 1, "b": 1}) == 2.0
    assert compose_slope(parallel(edge("a"), edge("b")), {"a": 1, "b": 1}) == 0.5
    t = series(parallel(edge("e1"), edge("e2")), edge("e3"))
    b = {"e1": 1.0, "e2": 1.0, "e3": 2.0}
    assert compose_slope(t, b) == pytest.approx(1.0, abs=1e-15)
    # oracle: cost of the Beckmann minimizer per unit demand
    oracle = beckmann_oracle(t, b, 1.0)
    assert oracle.path_costs.max() == pytest.approx(1.0, abs=1e-9)


def test_slope_infinite_without_positive_path():
    assert compose_slope(series(edge("a"), edge("b")), {"a": 1.0}) == math.inf
    assert compose_slope(edge("a"), {}) == math.inf


def test_demand_examples():
    assert solve_demand(2.0, Homogeneous(2, 1)) == 1.0
    assert solve_demand(1.0, PowerLaw(3)) == 1.0
    x = solve_demand(4.0, PowerLaw(3))
    assert x == pytest.approx(0.25 ** 0.75, abs=1e-12)
    assert x == pytest.approx(bisect_root(lambda t: t ** (-1 / 3) - 4 * t, 1e-9, 10.0), abs=1e-10)
    assert solve_demand(math.inf, PowerLaw(3)) == 0.0
    assert solve_demand(math.inf, Homogeneous(2, 1)) == 0.0


def test_homogeneous_tie_resolves_to_d():
    assert solve_demand(2.0, Homogeneous(2.0, 1.0)) == 1.0
    assert solve_demand(4.0, Homogeneous(2.0, 1.0)) == 0.5


def test_piecewise_demand_matches_bisection_oracle():
    res = PiecewiseLinear(((0, 3), (1, 2), (2, 0.5), (4, 0)))
    for sigma in (0.1, 0.5, 1.0, 2.0, 5.0, 50.0):
        x = solve_demand(sigma, res)
        ref = bisect_root(lambda t: res.u(t) - sigma * t, 0.0, 4.0)
        assert x == pytest.approx(ref, abs=1e-10)


def test_piecewise_beyond_last_breakpoint_is_zero():
    res = PiecewiseLinear(((0, 2), (1, 2)))
    assert res.u(1.5) == 0.0
    # u(1) = 2 > 0.5 * 1, so demand is capped at x_max
    assert solve_demand(0.5, res) == 1.0


def test_piecewise_rejects_increase():
    with pytest.raises(NonMonotoneReservation):
        PiecewiseLinear(((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        PiecewiseLinear(((1, 1), (2, 0)))


def test_piecewise_integral_exact():
    res = PiecewiseLinear(((0, 2), (1, 1), (3, 0)))
    assert res.integral(1.0) == pytest.approx(1.5)
    assert res.integral(2.0) == pytest.approx(1.5 + 0.75)
    assert res.integral(10.0) == pytest.approx(2.5)


def test_powerlaw_integral():
    with pytest.raises(DivergentWelfare):
        PowerLaw(1.0).integral(1.0)
    # compare with a midpoint rule away from the singularity plus the exact head
    a, F = 3.0, 2.0
    xs = np.linspace(1e-3, F, 200001)
    mid = 0.5 * (xs[1:] + xs[:-1])
    approx = np.sum(mid ** (-1 / a) * np.diff(xs)) + a / (a - 1) * 1e-3 ** ((a - 1) / a)
    assert PowerLaw(a).integral(F) == pytest.approx(approx, rel=1e-8)


def test_reservation_dict_round_trip():
    for res in (Homogeneous(2.0, 1.0), PowerLaw(1.5), PiecewiseLinear(((0, 1), (2, 0)))):
        assert reservation_from_dict(reservation_to_dict(res)) == res
    with pytest.raises(ValueError):
        reservation_from_dict({"type": "linear"})


def test_edge_flow_examples():
    t = parallel(series(edge("e1"), edge("e2")), edge("e3"))
    f = edge_flows(t, {"e1": 1, "e2": 1, "e3": 1}, 3.0)
    assert f == pytest.approx({"e1": 1.0, "e2": 1.0, "e3": 2.0})
    assert edge_flows(edge("e"), {"e": 1}, 1.0) == {"e": 1.0}
    # slopes 1 and 2 in parallel, demand 3
    f = edge_flows(parallel(edge("a"), edge("b")), {"a": 1.0, "b": 0.5}, 3.0)
    assert f == pytest.approx({"a": 2.0, "b": 1.0})


def test_path_flow_decomposition():
    assert path_flow_decomposition(edge("e"), {("e",): 0.5}, 1.0) == {("e",): 1.0}
    t = parallel(edge("a"), edge("b"))
    assert path_flow_decomposition(t, {("a",): 1.0, ("b",): 3.0}, 2.0) == {("a",): 0.5, ("b",): 1.5}
    with pytest.raises(EmptyInvestment):
        path_flow_decomposition(t, {("a",): 0.0}, 1.0)
    with pytest.raises(PreconditionViolated):
        path_flow_decomposition(parallel(edge("a"), series(edge("b"), edge("c"))), {("b", "c"): 1.0}, 1.0)


def test_paper_example_edge_cost():
    out = wardrop_outcome(edge("e"), {"e": 0.5}, Homogeneous(2, 1))
    assert (out.sigma, out.demand, out.per_user_cost) == (2.0, 1.0, 2.0)
    assert out.edge_flows["e"] / 0.5 == 2.0


def test_zero_investment_outcome():
    out = wardrop_outcome(series(edge("a"), edge("b")), {}, PowerLaw(2))
    assert out.demand == 0.0 and out.sigma == math.inf and out.per_user_cost == 0.0


def test_series_powerlaw_outcome():
    out = wardrop_outcome(series(edge("a"), edge("b")), {"a": 1, "b": 1}, PowerLaw(3))
    assert out.sigma == 2.0
    ref = bisect_root(lambda t: t ** (-1 / 3) - 2 * t, 1e-9, 10.0)
    assert out.demand == pytest.approx(ref, abs=1e-10)
    assert out.to_dict()["edge_flows"]["a"] == pytest.approx(out.demand)


def test_negative_investment_rejected():
    with pytest.raises(ValueError):
        wardrop_outcome(edge("a"), {"a": -1.0}, PowerLaw(2))


def test_flows_match_beckmann_oracle(rng):
    for _ in range(100):
        t = random_tree(rng, max_paths=8)
        flat = flatten(t)
        b = rng.uniform(0.05, 3.0, flat.n_edges)
        f = edge_flows(t, b, 1.7)
        oracle = beckmann_oracle(t, b, 1.7)
        for e in flat.edge_ids:
            assert f[e] == pytest.approx(oracle.edge_flows[e], abs=1e-6)


def test_equal_path_costs_and_dominated_paths(rng):
    for _ in range(100):
        t = random_tree(rng, max_paths=8)
        flat = flatten(t)
        b = rng.uniform(0.05, 3.0, flat.n_edges) * (rng.random(flat.n_edges) < 0.8)
        sigma = compose_slope(t, b)
        if sigma == math.inf:
            continue
        f = np.array([edge_flows(t, b, 2.0)[e] for e in flat.edge_ids])
        paths = enumerate_paths(t).paths
        costs = path_costs(flat, b, f, paths)
        level = 2.0 * sigma
        for p, c in zip(paths, costs):
            used = all(f[flat.index[e]] > 0 for e in p)
            if used:
                assert c == pytest.approx(level, abs=1e-9 * max(1, level))
            else:
                assert c >= level - 1e-9
