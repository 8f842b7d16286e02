"""First stage bookkeeping: investments, provider profits, social welfare.

Two strategy representations coexist:

* :class:`InvestmentMatrix` - arbitrary per-provider, per-edge investments;
* the reduced scalar form - one number per provider, the total it places on
  shortest paths.  :func:`embed_scalar_on_shortest_paths` maps the scalar form
  back onto a concrete tree.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import UnknownEdge, UnsupportedReservation
from .sp_graph import SPTree, enumerate_shortest_paths, flatten
from .wardrop import Homogeneous, PowerLaw, ReservationSpec, solve


@dataclass(frozen=True, eq=False)
class InvestmentMatrix:
    """Row ``i`` holds provider ``i``'s investments, columns follow ``edge_ids``."""

    edge_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != len(self.edge_ids):
            raise ValueError(f"values must have shape (n, {len(self.edge_ids)})")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("investments must be finite and nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, tree: SPTree, n: int) -> "InvestmentMatrix":
        flat = flatten(tree)
        return cls(flat.edge_ids, np.zeros((n, flat.n_edges)))

    @classmethod
    def from_mapping(cls, tree: SPTree, rows: Mapping, n: int | None = None) -> "InvestmentMatrix":
        """Build from ``{provider_index: {edge_id: value}}``; absent entries are 0."""
        flat = flatten(tree)
        idx = {int(i): r for i, r in rows.items()}
        n = n if n is not None else (max(idx) + 1 if idx else 1)
        vals = np.zeros((n, flat.n_edges))
        for i, row in idx.items():
            if not 0 <= i < n:
                raise IndexError(f"provider index {i} out of range for n={n}")
            for eid, v in row.items():
                if eid not in flat.index:
                    raise UnknownEdge(f"unknown edge id {eid!r}")
                vals[i, flat.index[eid]] = float(v)
        return cls(flat.edge_ids, vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def edge_totals(self) -> np.ndarray:
        """b_e = sum over providers."""
        return self.values.sum(axis=0)

    @property
    def provider_totals(self) -> np.ndarray:
        """Total spending per provider, sum_e b_{i,e}."""
        return self.values.sum(axis=1)

    def with_row(self, i: int, row: np.ndarray) -> "InvestmentMatrix":
        vals = self.values.copy()
        vals[i] = row
        return InvestmentMatrix(self.edge_ids, vals)

    def to_mapping(self) -> dict:
        return {
            str(i): {e: float(v) for e, v in zip(self.edge_ids, row) if v != 0.0}
            for i, row in enumerate(self.values)
        }


@dataclass(frozen=True)
class PathStrategyProfile:
    """Per-provider path investments ``{path_tuple: b_iP}``."""

    strategies: tuple

    @property
    def n(self) -> int:
        return len(self.strategies)

    @property
    def scalars(self) -> np.ndarray:
        return np.array([sum(s.values()) for s in self.strategies], dtype=float)

    def path_totals(self) -> dict:
        out: dict = {}
        for strat in self.strategies:
            for p, v in strat.items():
                out[p] = out.get(p, 0.0) + v
        return out

    def to_matrix(self, tree: SPTree) -> InvestmentMatrix:
        flat = flatten(tree)
        vals = np.zeros((self.n, flat.n_edges))
        for i, strat in enumerate(self.strategies):
            for path, v in strat.items():
                for e in path:
                    vals[i, flat.index[e]] += v
        return InvestmentMatrix(flat.edge_ids, vals)


@dataclass(frozen=True)
class ProfitReport:
    profits: np.ndarray
    revenue: np.ndarray
    cost: np.ndarray

    @property
    def total(self) -> float:
        return float(self.profits.sum())

    def to_dict(self) -> dict:
        return {
            "profits": self.profits.tolist(),
            "revenue": self.revenue.tolist(),
            "cost": self.cost.tolist(),
            "total": self.total,
        }


def _profit_parts(values: np.ndarray, b_e: np.ndarray, flows: np.ndarray):
    pos = b_e > 0
    ratio = np.zeros_like(b_e)
    ratio[pos] = flows[pos] ** 2 / b_e[pos] ** 2
    revenue = values @ ratio
    cost = values.sum(axis=1)
    return revenue, cost


def profit_vector(flat, values: np.ndarray, res: ReservationSpec):
    """Fast path: ``(profits, demand)`` for a raw (n, m) investment array."""
    b_e = values.sum(axis=0)
    _, demand, flows = solve(flat, b_e, res)
    revenue, cost = _profit_parts(values, b_e, flows)
    return revenue - cost, demand


def profit(tree: SPTree, b: InvestmentMatrix, res: ReservationSpec) -> ProfitReport:
    """pi_i = sum_e b_ie f_e^2 / b_e^2 - sum_e b_ie with f the Wardrop flow for ``b``."""
    flat = flatten(tree)
    b_e = b.edge_totals
    _, _, flows = solve(flat, b_e, res)
    revenue, cost = _profit_parts(b.values, b_e, flows)
    return ProfitReport(revenue - cost, revenue, cost)


def reduced_profit(s: Sequence[float], k: int, res: ReservationSpec) -> ProfitReport:
    """Profits when provider ``i`` spreads ``s[i]`` over shortest paths of length ``k``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("scalar strategies must be nonnegative")
    total = float(s.sum())
    cost = k * s
    profits = np.zeros_like(s)
    if total > 0:
        pos = s > 0
        if isinstance(res, Homogeneous):
            margin = min(res.R ** 2 / k ** 2, res.d ** 2 / total ** 2) - 1.0
            profits[pos] = k * margin * s[pos]
        elif isinstance(res, PowerLaw):
            a = res.alpha
            unit = total ** (-2.0 / (a + 1)) * k ** ((1.0 - a) / (a + 1)) - k
            profits[pos] = s[pos] * unit
        else:
            raise UnsupportedReservation("reduced profits exist only for homogeneous and power-law users")
    return ProfitReport(profits, profits + cost, cost)


def social_welfare(tree: SPTree, b: InvestmentMatrix | np.ndarray | Mapping, res: ReservationSpec) -> float:
    """Consumer value integral up to the demand minus total investment."""
    flat = flatten(tree)
    if isinstance(b, InvestmentMatrix):
        b_e = b.edge_totals
    else:
        b_e = flat.vector(b)
    _, demand, _ = solve(flat, b_e, res)
    return float(res.integral(demand) - b_e.sum())


def embed_scalar_on_shortest_paths(tree: SPTree, s: Sequence[float], seed: int | None = 0,
                                   cap: int = 4096) -> PathStrategyProfile:
    """Spread each ``s[i]`` over a random nonempty set of shortest paths.

    The split is reproducible for a given ``seed``; ``seed=None`` puts all of
    a provider's mass on the first shortest path.
    """
    paths = enumerate_shortest_paths(tree, cap).paths
    rng = np.random.default_rng(seed) if seed is not None else None
    strategies = []
    for amount in s:
        amount = float(amount)
        if amount < 0:
            raise ValueError("scalar strategies must be nonnegative")
        if amount == 0:
            strategies.append({})
            continue
        if rng is None or len(paths) == 1:
            strategies.append({paths[0]: amount})
            continue
        m = int(rng.integers(1, len(paths) + 1))
        chosen = rng.choice(len(paths), size=m, replace=False)
        w = rng.dirichlet(np.ones(m))
        strat = {}
        for j, wj in zip(chosen, w):
            strat[paths[int(j)]] = amount * float(wj)
        strategies.append(strat)
    return PathStrategyProfile(tuple(strategies))
