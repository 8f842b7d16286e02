"""Second stage: Wardrop user equilibrium with elastic demand.

With latency ``f_e / b_e`` on every invested edge, the per-user cost of a
Wardrop flow is linear in total demand, ``c_b(x) = sigma * x``.  The slope
``sigma`` composes over the tree (series: sum, parallel: harmonic sum) and
the demand is the smallest ``x`` with ``u(x) <= sigma * x``.
"""
from __future__ import annotations

import bisect
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DivergentWelfare, EmptyInvestment, NonMonotoneReservation, PreconditionViolated
from .kernels import unit_solution
from .sp_graph import SPTree, flatten, shortest_path_length

INF = math.inf


# ---------------------------------------------------------------------------
# reservation functions

@dataclass(frozen=True)
class Homogeneous:
    """``d`` users, each willing to pay ``R``: u(x) = R on [0, d], 0 beyond."""

    R: float
    d: float

    def __post_init__(self):
        if self.R < 0 or self.d < 0:
            raise ValueError("R and d must be nonnegative")

    def u(self, x: float) -> float:
        return self.R if x <= self.d else 0.0

    def integral(self, demand: float) -> float:
        return self.R * min(demand, self.d)


@dataclass(frozen=True)
class PowerLaw:
    """u(x) = x^(-1/alpha)."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def u(self, x: float) -> float:
        return INF if x == 0 else x ** (-1.0 / self.alpha)

    def integral(self, demand: float) -> float:
        if self.alpha <= 1:
            raise DivergentWelfare(f"integral of x^(-1/alpha) diverges at 0 for alpha={self.alpha}")
        if demand == 0:
            return 0.0
        a = self.alpha
        return a / (a - 1) * demand ** ((a - 1) / a)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through ``points`` (x ascending, first x = 0); 0 past the last x."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 1:
            raise ValueError("need at least one breakpoint")
        if pts[0][0] != 0.0:
            raise ValueError("first breakpoint must be at x = 0")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 <= x0:
                raise ValueError("breakpoint x values must be strictly increasing")
            if y1 > y0:
                raise NonMonotoneReservation(f"u increases between x={x0} and x={x1}")
        if any(y < 0 for _, y in pts):
            raise ValueError("reservation values must be nonnegative")

    @property
    def x_max(self) -> float:
        return self.points[-1][0]

    def u(self, x: float) -> float:
        pts = self.points
        if x > pts[-1][0]:
            return 0.0
        xs = [p[0] for p in pts]
        j = bisect.bisect_right(xs, x) - 1
        if j >= len(pts) - 1:
            return pts[-1][1]
        (x0, y0), (x1, y1) = pts[j], pts[j + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def integral(self, demand: float) -> float:
        """Exact area under u on [0, demand] (trapezoids are exact here)."""
        demand = min(demand, self.x_max)
        total = 0.0
        for (x0, y0), (x1, _) in zip(self.points, self.points[1:]):
            if demand <= x0:
                break
            hi = min(x1, demand)
            total += 0.5 * (y0 + self.u(hi)) * (hi - x0)
        return total


ReservationSpec = Homogeneous | PowerLaw | PiecewiseLinear


def reservation_from_dict(obj: Mapping) -> ReservationSpec:
    kind = obj.get("type")
    if kind == "homogeneous":
        return Homogeneous(float(obj["R"]), float(obj["d"]))
    if kind == "powerlaw":
        return PowerLaw(float(obj["alpha"]))
    if kind == "piecewise":
        return PiecewiseLinear(tuple(tuple(p) for p in obj["points"]))
    raise ValueError(f"unknown reservation type {kind!r}")


def reservation_to_dict(res: ReservationSpec) -> dict:
    if isinstance(res, Homogeneous):
        return {"type": "homogeneous", "R": res.R, "d": res.d}
    if isinstance(res, PowerLaw):
        return {"type": "powerlaw", "alpha": res.alpha}
    return {"type": "piecewise", "points": [list(p) for p in res.points]}


# ---------------------------------------------------------------------------
# outcome

@dataclass(frozen=True)
class WardropOutcome:
    sigma: float
    demand: float
    edge_flows: dict
    per_user_cost: float

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "demand": self.demand,
            "per_user_cost": self.per_user_cost,
            "edge_flows": dict(self.edge_flows),
        }


def compose_slope(tree: SPTree, b: Mapping[str, float] | np.ndarray) -> float:
    """Cost slope sigma of the user equilibrium; ``inf`` if no all-positive path exists."""
    flat = flatten(tree)
    sigma, *_ = unit_solution(flat, flat.vector(b))
    return sigma


def solve_demand(sigma: float, res: ReservationSpec, tol: float = 1e-12) -> float:
    """Equilibrium demand inf{x >= 0 : u(x) <= sigma * x}."""
    if sigma < 0 or math.isnan(sigma):
        raise ValueError(f"invalid slope {sigma}")
    if sigma == INF:
        return 0.0
    if isinstance(res, Homogeneous):
        if sigma == 0:
            return res.d
        return min(res.R / sigma, res.d)
    if isinstance(res, PowerLaw):
        if sigma == 0:
            return INF
        return sigma ** (-res.alpha / (res.alpha + 1.0))
    if isinstance(res, PiecewiseLinear):
        return _bisect_demand(sigma, res, tol)
    raise TypeError(f"unsupported reservation {res!r}")


def _bisect_demand(sigma: float, res: PiecewiseLinear, tol: float) -> float:
    x_max = res.x_max
    if res.u(0.0) <= 0.0:
        return 0.0
    if res.u(x_max) > sigma * x_max:
        # u drops to 0 right after x_max
        return x_max
    lo, hi = 0.0, x_max
    while hi - lo > tol * max(1.0, x_max):
        mid = 0.5 * (lo + hi)
        if res.u(mid) <= sigma * mid:
            hi = mid
        else:
            lo = mid
    return hi


def edge_flows(tree: SPTree, b: Mapping[str, float] | np.ndarray, demand: float) -> dict:
    """Per-edge Wardrop flows for a given total demand (0 on pruned edges)."""
    flat = flatten(tree)
    sigma, _, _, unit = unit_solution(flat, flat.vector(b))
    if sigma == INF:
        unit = np.zeros(flat.n_edges)
    return dict(zip(flat.edge_ids, (demand * unit).tolist()))


def path_flow_decomposition(tree: SPTree, b_paths: Mapping[tuple, float], demand: float) -> dict:
    """Path flows f_P = (b_P / |b|) * |f| for investments placed on shortest paths.

    ``b_paths`` maps path tuples (edge ids) to total path investment b_P.
    """
    k = shortest_path_length(tree)
    for path in b_paths:
        if len(path) != k:
            raise PreconditionViolated(f"path {path} is not a shortest path (k={k})")
    total = float(sum(b_paths.values()))
    if total <= 0:
        if demand > 0:
            raise EmptyInvestment("positive demand requested with zero investment")
        return {p: 0.0 for p in b_paths}
    return {p: v / total * demand for p, v in b_paths.items()}


def solve(flat, b_vec: np.ndarray, res: ReservationSpec):
    """Fast path used by the market and verify modules.

    Returns ``(sigma, demand, edge_flow_vector)``.
    """
    sigma, _, _, unit = unit_solution(flat, b_vec)
    demand = solve_demand(sigma, res)
    if demand == 0.0:
        return sigma, 0.0, np.zeros(flat.n_edges)
    return sigma, demand, demand * unit


def wardrop_outcome(tree: SPTree, b: Mapping[str, float] | np.ndarray, res: ReservationSpec) -> WardropOutcome:
    flat = flatten(tree)
    b_vec = flat.vector(b)
    if np.any(b_vec < 0):
        raise ValueError("investments must be nonnegative")
    sigma, demand, flows = solve(flat, b_vec, res)
    cost = sigma * demand if demand > 0 else 0.0
    return WardropOutcome(sigma, demand, dict(zip(flat.edge_ids, flows.tolist())), cost)


def path_costs(flat, b_vec: np.ndarray, flows: np.ndarray, paths: Sequence[Sequence[str]]) -> list[float]:
    """Sum of f_e / b_e along each path (inf through uninvested edges)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        per_edge = np.where(b_vec > 0, flows / np.where(b_vec > 0, b_vec, 1.0), INF)
    return [float(sum(per_edge[flat.index[e]] for e in p)) for p in paths]
