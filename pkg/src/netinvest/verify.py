"""Numerical verification harness.

* :func:`best_response_gap` searches for profitable unilateral deviations.
* :func:`construct_parallel_shift` and :func:`construct_series_rebalance`
  build the exact demand-preserving better responses that move investment
  onto shortest paths.
* :func:`check_shortest_path_theorem` samples profiles that leave shortest
  paths (or unbalance a series composition) and confirms that some provider
  has a strictly profitable demand-preserving deviation.
* :func:`beckmann_oracle` recomputes Wardrop flows by minimizing the
  potential sum f_e^2 / (2 b_e) directly over path flows.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass

import numpy as np

from .equilibria import own_profit, spne
from .errors import EmptyInvestment, PreconditionViolated, TooManyPaths
from .kernels import unit_solution
from .market import InvestmentMatrix, embed_scalar_on_shortest_paths, profit_vector
from .optimize import golden_max, grid_golden_max
from .sp_graph import (
    PARALLEL, SERIES, SPTree, count_paths, enumerate_paths, flatten, one_shortest_path,
    random_tree, shortest_path_length, to_dict,
)
from .wardrop import Homogeneous, PowerLaw, ReservationSpec, reservation_to_dict, solve_demand

DEMAND_TOL = 1e-9
MIN_GAIN = 1e-8
PREDICTION_TOL = 1e-7


def _same_demand(d0: float, d1: float, tol: float = DEMAND_TOL) -> bool:
    return abs(d0 - d1) <= tol * max(1.0, abs(d0))


# ---------------------------------------------------------------------------
# generic best-response search

@dataclass(frozen=True)
class DeviationResult:
    provider: int
    original: float
    best: float
    gap: float
    strategy: dict
    demand_preserving: bool
    method: str = "search"

    def to_dict(self) -> dict:
        return asdict(self)


def best_response_gap(tree: SPTree, b: InvestmentMatrix, res: ReservationSpec, i: int,
                      grid: int = 512, rounds: int = 200, max_paths: int = 8) -> DeviationResult:
    """Largest profit improvement found for provider ``i`` by unilateral deviation.

    Two searches run: a scalar line along one shortest path (grid plus
    golden section on [0, 4|b| + 1]) and, on trees with at most
    ``max_paths`` paths, coordinate ascent over per-path investments.
    The original strategy is always a candidate, so the gap is >= 0.
    """
    flat = flatten(tree)
    values = np.array(b.values, dtype=float)
    if not 0 <= i < values.shape[0]:
        raise IndexError(f"provider {i} out of range")
    profits0, demand0 = profit_vector(flat, values, res)
    original = float(profits0[i])
    scale = values.sum() / flat.length[flat.root]
    hi = 4.0 * scale + 1.0

    work = values.copy()

    def evaluate(row: np.ndarray) -> float:
        work[i] = row
        return float(profit_vector(flat, work, res)[0][i])

    short = np.zeros(flat.n_edges)
    short[[flat.index[e] for e in one_shortest_path(tree)]] = 1.0
    x_best, f_best = grid_golden_max(lambda x: evaluate(x * short), 0.0, hi, n_grid=grid)
    best_row = x_best * short
    method = "scalar"

    if count_paths(tree) <= max_paths:
        paths = enumerate_paths(tree, max_paths).paths
        incid = np.zeros((len(paths), flat.n_edges))
        for p, path in enumerate(paths):
            incid[p, [flat.index[e] for e in path]] = 1.0
        start = paths.index(one_shortest_path(tree))
        y = np.zeros(len(paths))
        y[start] = x_best
        f_cur = f_best
        for _ in range(rounds):
            before = f_cur
            for p in range(len(paths)):
                base = y @ incid - y[p] * incid[p]

                def along(t, base=base, p=p):
                    return evaluate(base + t * incid[p])

                t, ft = grid_golden_max(along, 0.0, hi, n_grid=64)
                if ft > f_cur:
                    y[p], f_cur = t, ft
            if f_cur - before <= 1e-14 * max(1.0, abs(f_cur)):
                break
        if f_cur > f_best:
            f_best, best_row, method = f_cur, y @ incid, "coordinate"

    if original >= f_best:
        f_best, best_row, method = original, values[i].copy(), "original"
    work[i] = best_row
    demand1 = profit_vector(flat, work, res)[1]
    strategy = {e: float(v) for e, v in zip(flat.edge_ids, best_row) if v != 0.0}
    return DeviationResult(i, original, f_best, max(f_best - original, 0.0), strategy,
                           _same_demand(demand0, demand1), method)


# ---------------------------------------------------------------------------
# constructive deviations

def parallel_shift_gain(amount: float, k: int, l: int) -> float:
    """Exact gain of moving ``amount`` from a length-l branch to (k/l)*amount on a length-k branch."""
    return amount * (l - k * k / l)


def construct_parallel_shift(strategy: Mapping[tuple, float], long_path: tuple,
                             short_path: tuple) -> tuple[dict, float]:
    """Move a provider's investment off ``long_path`` onto ``short_path``.

    The long-path amount ``x`` is replaced by ``(k/l) x`` on the short path,
    which keeps the parallel block's conductance and hence the demand.
    Returns the new path strategy and the predicted profit gain.
    """
    k, l = len(short_path), len(long_path)
    if not k < l:
        raise PreconditionViolated(f"short path must be strictly shorter (k={k}, l={l})")
    x = float(strategy.get(long_path, 0.0))
    if x < 0:
        raise PreconditionViolated("negative investment")
    if x == 0:
        return dict(strategy), 0.0
    out = {p: v for p, v in strategy.items() if p != long_path}
    out[short_path] = out.get(short_path, 0.0) + k / l * x
    return out, parallel_shift_gain(x, k, l)


@dataclass(frozen=True)
class Rebalance:
    beta: float
    gain: float


def rebalance_beta(x1: float, x2: float, a: float, k: int, l: int) -> float:
    den = k * (a + x2) + l * (a + x1)
    if den == 0:
        return 0.0
    return (k * x1 * (a + x2) + l * x2 * (a + x1)) / den


def rebalance_gain(x1: float, x2: float, a: float, k: int, l: int, flow: float) -> float:
    diff2 = (x1 - x2) ** 2
    if diff2 == 0:
        return 0.0
    revenue = 0.0
    if flow > 0:
        revenue = flow ** 2 * a * k * l * diff2 / ((k + l) * (a + x1) ** 2 * (a + x2) ** 2)
    return revenue + k * l * diff2 / (a * (k + l) + k * x2 + l * x1)


def construct_series_rebalance(x1: float, x2: float, others1: float, others2: float,
                               k: int, l: int, flow: float = 1.0) -> Rebalance:
    """Balance a provider's split (x1, x2) over two series blocks of lengths k and l.

    The other providers must already be balanced (``others1 == others2``).
    The common level beta keeps k/(a+beta) + l/(a+beta) = k/(a+x1) + l/(a+x2),
    so the series slope and the demand are unchanged; ``gain`` is the
    resulting profit increase when ``flow`` passes through the composition.
    """
    if min(x1, x2, others1, others2) < 0:
        raise PreconditionViolated("amounts must be nonnegative")
    if abs(others1 - others2) > 1e-12 * max(1.0, others1, others2):
        raise PreconditionViolated(f"other providers unbalanced: {others1} vs {others2}")
    a = others1
    if (a + x1 == 0) != (a + x2 == 0) or (a + x1 == 0):
        raise PreconditionViolated("one block carries no investment at all")
    return Rebalance(rebalance_beta(x1, x2, a, k, l), rebalance_gain(x1, x2, a, k, l, flow))


def series_shift_delta(eps: float, A1: float, A2: float, k: int, l: int) -> float:
    """Amount to take from block 2 when block 1 gains ``eps`` so that k/A1 + l/A2 is unchanged."""
    return k * eps * A2 ** 2 / (l * A1 ** 2 + l * A1 * eps + k * eps * A2)


def _series_shift_profit(eps, a1, a2, A1, A2, k, l, flow):
    delta = series_shift_delta(eps, A1, A2, k, l)
    n1, n2 = a1 + eps, a2 - delta
    B1, B2 = A1 + eps, A2 - delta
    return n1 * flow ** 2 * k / B1 ** 2 + n2 * flow ** 2 * l / B2 ** 2 - k * n1 - l * n2, delta


def _series_shift_limit(a2, A1, A2, k, l) -> float:
    """Largest eps whose delta does not exceed the provider's amount a2 in block 2."""
    den = k * A2 ** 2 - a2 * l * A1 - a2 * k * A2
    if den <= 0:
        return math.inf
    return a2 * l * A1 ** 2 / den


def best_series_shift(a1, a2, A1, A2, k, l, flow):
    """Optimize eps for one provider moving investment into block 1; returns (gain, eps, delta)."""
    base, _ = _series_shift_profit(0.0, a1, a2, A1, A2, k, l, flow)
    cap = min(_series_shift_limit(a2, A1, A2, k, l), 10.0 * (A1 + A2) + 1.0)
    if cap <= 0 or a2 <= 0:
        return 0.0, 0.0, 0.0
    eps, val = grid_golden_max(lambda e: _series_shift_profit(e, a1, a2, A1, A2, k, l, flow)[0],
                               0.0, cap, n_grid=128)
    # near 0 the grid is coarse; refine there too
    e2, v2 = golden_max(lambda e: _series_shift_profit(e, a1, a2, A1, A2, k, l, flow)[0],
                        0.0, cap / 127.0)
    if v2 > val:
        eps, val = e2, v2
    _, delta = _series_shift_profit(eps, a1, a2, A1, A2, k, l, flow)
    return val - base, eps, delta


# ---------------------------------------------------------------------------
# block structure of a profile

@dataclass
class _Blocks:
    amount: np.ndarray       # (n_nodes, n) per-provider amount per shortest path of the block
    clean: np.ndarray        # (n_nodes,) bool
    first_violation: int     # -1 if the whole profile is clean


def _blocks(flat, values: np.ndarray, tol: float = 1e-12) -> _Blocks:
    n = values.shape[0]
    amount = np.zeros((flat.n_nodes, n))
    clean = np.ones(flat.n_nodes, dtype=bool)
    first = -1
    for v in range(flat.n_nodes):
        kind = flat.kind[v]
        kids = flat.child_list(v)
        if not kids:
            amount[v] = values[:, flat.edge_slot[v]]
            continue
        sub = amount[kids]
        ok = bool(clean[kids].all())
        if kind == SERIES:
            spread = sub.max(axis=0) - sub.min(axis=0)
            ok = ok and bool(np.all(spread <= tol * np.maximum(1.0, sub.max(axis=0))))
            amount[v] = sub.mean(axis=0)
        else:
            longer = flat.length[kids] > flat.length[v]
            ok = ok and not np.any(sub[longer] > 0)
            amount[v] = sub.sum(axis=0)
        clean[v] = ok
        if not ok and first < 0:
            first = v
    return _Blocks(amount, clean, first)


def is_shortest_path_profile(tree: SPTree, b: InvestmentMatrix | np.ndarray) -> bool:
    """True iff every provider plays a balanced strategy on shortest paths."""
    values = b.values if isinstance(b, InvestmentMatrix) else b
    return _blocks(flatten(tree), np.asarray(values, dtype=float)).first_violation < 0


def has_non_shortest_structure(tree: SPTree) -> bool:
    """Whether some profile can leave shortest paths or unbalance a series block."""
    flat = flatten(tree)
    for v in range(flat.n_nodes):
        if flat.kind[v] == SERIES:
            return True
        if flat.kind[v] == PARALLEL and np.any(flat.length[flat.child_list(v)] > flat.length[v]):
            return True
    return False


@dataclass(frozen=True)
class Deviation:
    provider: int
    method: str
    values: np.ndarray
    predicted_gain: float


def _add_on_shortest(flat, row: np.ndarray, node: int, amount: float) -> None:
    for e in one_shortest_path(flat.nodes[node]):
        row[flat.index[e]] += amount


def _scale_block(flat, row: np.ndarray, node: int, old: float, new: float) -> None:
    idx = flat.node_edges[node]
    if old > 0:
        row[idx] *= new / old
    else:
        _add_on_shortest(flat, row, node, new)


def find_constructive_deviation(tree: SPTree, b: InvestmentMatrix | np.ndarray,
                                res: ReservationSpec) -> Deviation | None:
    """Demand-preserving profitable deviation at the lowest unbalanced block, or None if clean.

    The violated block ``v`` has only clean children.  A parallel block with
    investment on a longer branch gets the parallel shift; a series block
    with an imbalance gets the best eps-shift between two children (and the
    rebalance when the other providers are balanced on that pair).  If none
    of these gains and no flow reaches the block, withdrawing from it is
    free of side effects.
    """
    flat = flatten(tree)
    values = np.array(b.values if isinstance(b, InvestmentMatrix) else b, dtype=float)
    blocks = _blocks(flat, values)
    v = blocks.first_violation
    if v < 0:
        return None
    n = values.shape[0]
    kids = flat.child_list(v)
    amount = blocks.amount
    sigma, _, node_flow, _ = unit_solution(flat, values.sum(axis=0))
    flow = float(node_flow[v]) * solve_demand(sigma, res)

    best: Deviation | None = None

    def consider(dev: Deviation):
        nonlocal best
        if best is None or dev.predicted_gain > best.predicted_gain:
            best = dev

    if flat.kind[v] == PARALLEL:
        k = int(flat.length[v])
        target = next(c for c in kids if flat.length[c] == k)
        for c in kids:
            l = int(flat.length[c])
            if l == k:
                continue
            for i in range(n):
                x = amount[c, i]
                if x <= 0:
                    continue
                new = values.copy()
                new[i, flat.node_edges[c]] = 0.0
                _add_on_shortest(flat, new[i], target, k / l * x)
                consider(Deviation(i, "parallel-shift", new, parallel_shift_gain(x, k, l)))
        return best

    totals = amount[kids].sum(axis=1)
    for p in range(len(kids)):
        for q in range(len(kids)):
            if p == q or totals[p] <= 0 or totals[q] <= 0:
                continue
            cp, cq = kids[p], kids[q]
            if np.allclose(amount[cp], amount[cq], rtol=1e-12, atol=0):
                continue
            k, l = int(flat.length[cp]), int(flat.length[cq])
            A1, A2 = totals[p], totals[q]
            for j in range(n):
                a1, a2 = amount[cp, j], amount[cq, j]
                gain, eps, delta = best_series_shift(a1, a2, A1, A2, k, l, flow)
                if gain > 0:
                    new = values.copy()
                    _scale_block(flat, new[j], cp, a1, a1 + eps)
                    _scale_block(flat, new[j], cq, a2, max(a2 - delta, 0.0))
                    consider(Deviation(j, "series-shift", new, gain))
            if p < q:
                for i in range(n):
                    o1, o2 = A1 - amount[cp, i], A2 - amount[cq, i]
                    if abs(o1 - o2) > 1e-12 * max(1.0, o1, o2) or o1 <= 0:
                        continue
                    x1, x2 = amount[cp, i], amount[cq, i]
                    reb = construct_series_rebalance(x1, x2, o1, o2, k, l, flow)
                    new = values.copy()
                    _scale_block(flat, new[i], cp, x1, reb.beta)
                    _scale_block(flat, new[i], cq, x2, reb.beta)
                    consider(Deviation(i, "series-rebalance", new, reb.gain))

    if (best is None or best.predicted_gain < MIN_GAIN) and flow == 0.0:
        # no flow reaches the block (a child is uninvested or an ancestor is cut off)
        for i in range(n):
            cost = float(values[i, flat.node_edges[v]].sum())
            if cost > 0:
                new = values.copy()
                new[i, flat.node_edges[v]] = 0.0
                consider(Deviation(i, "withdraw", new, cost))
    return best


# ---------------------------------------------------------------------------
# shortest-path theorem trials

@dataclass(frozen=True)
class TrialRecord:
    """One verification trial.

    ``gap`` is the measured quantity: the recomputed gain for theorem
    trials, the best-response gap for equilibrium trials and the largest
    flow discrepancy for Wardrop trials.
    """

    seed: int
    instance: str
    kind: str
    provider: int
    method: str
    predicted: float
    gap: float
    demand_before: float
    demand_after: float
    demand_preserving: bool
    ok: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def instance_hash(tree: SPTree, res: ReservationSpec, b: np.ndarray | None = None) -> str:
    payload = {"graph": to_dict(tree), "reservation": reservation_to_dict(res)}
    if b is not None:
        payload["b"] = np.asarray(b).round(15).tolist()
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def random_reservation(rng: np.random.Generator) -> ReservationSpec:
    if rng.random() < 0.5:
        return Homogeneous(float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.2, 3.0)))
    return PowerLaw(float(rng.uniform(0.3, 4.0)))


def random_violating_profile(tree: SPTree, rng: np.random.Generator, n: int | None = None,
                             attempts: int = 200) -> np.ndarray:
    """Random investment array that leaves shortest paths or unbalances a series block."""
    if not has_non_shortest_structure(tree):
        raise PreconditionViolated("every profile on this tree is a shortest-path profile")
    flat = flatten(tree)
    paths = enumerate_paths(tree, 64).paths
    for _ in range(attempts):
        m = int(n if n is not None else rng.integers(1, 4))
        values = np.zeros((m, flat.n_edges))
        mode = rng.integers(0, 3)
        for i in range(m):
            if mode in (0, 2):
                for p in rng.choice(len(paths), size=int(rng.integers(1, min(3, len(paths)) + 1)), replace=False):
                    values[i, [flat.index[e] for e in paths[int(p)]]] += rng.uniform(0.2, 2.0)
            if mode in (1, 2):
                mask = rng.random(flat.n_edges) < (0.6 if mode == 1 else 0.25)
                values[i, mask] += rng.uniform(0.1, 2.0, size=int(mask.sum()))
        if _blocks(flat, values).first_violation >= 0:
            return values
    raise PreconditionViolated("could not sample a violating profile")


def theorem_trial(tree: SPTree, seed: int, res: ReservationSpec | None = None,
                  n: int | None = None) -> TrialRecord:
    """One seeded check: a violating profile must admit a profitable demand-preserving deviation."""
    rng = np.random.default_rng(seed)
    if res is None:
        res = random_reservation(rng)
    values = random_violating_profile(tree, rng, n)
    flat = flatten(tree)
    before, d0 = profit_vector(flat, values, res)
    dev = find_constructive_deviation(tree, values, res)
    tag = instance_hash(tree, res, values)
    if dev is None:
        return TrialRecord(seed, tag, "theorem", -1, "none", 0.0, 0.0, d0, d0, True, False,
                           "no constructive deviation found")
    after, d1 = profit_vector(flat, dev.values, res)
    gain = float(after[dev.provider] - before[dev.provider])
    preserving = _same_demand(d0, d1)
    ok = (preserving and gain >= MIN_GAIN
          and abs(gain - dev.predicted_gain) <= PREDICTION_TOL * max(1.0, abs(gain)))
    detail = "" if ok else f"gain={gain:.3e} predicted={dev.predicted_gain:.3e} demand {d0}->{d1}"
    return TrialRecord(seed, tag, "theorem", dev.provider, dev.method, dev.predicted_gain, gain,
                       d0, d1, preserving, ok, detail)


@dataclass(frozen=True)
class TheoremReport:
    trials: tuple
    skipped: bool

    @property
    def failures(self) -> list:
        return [t for t in self.trials if not t.ok]

    def to_dict(self) -> dict:
        return {"skipped": self.skipped, "failures": len(self.failures),
                "trials": [t.to_dict() for t in self.trials]}


def check_shortest_path_theorem(tree: SPTree, trials: int = 100, seed: int = 0,
                                res: ReservationSpec | None = None) -> TheoremReport:
    if not has_non_shortest_structure(tree):
        return TheoremReport((), True)
    return TheoremReport(tuple(theorem_trial(tree, seed + t, res) for t in range(trials)), False)


def random_theorem_trial(seed: int, max_paths: int = 8) -> TrialRecord:
    """Theorem trial on a random tree drawn from ``seed``."""
    rng = np.random.default_rng([seed, 1])
    while True:
        tree = random_tree(rng, max_paths=max_paths)
        if has_non_shortest_structure(tree):
            return theorem_trial(tree, seed)


# ---------------------------------------------------------------------------
# Beckmann potential oracle

@dataclass(frozen=True)
class OracleFlows:
    paths: tuple
    path_flows: np.ndarray
    edge_flows: dict
    path_costs: np.ndarray
    iterations: int


def beckmann_oracle(tree: SPTree, b: Mapping[str, float] | np.ndarray, demand: float,
                    max_paths: int = 8, tol: float = 1e-10, max_iter: int = 1_000_000) -> OracleFlows:
    """Minimize sum_e f_e^2 / (2 b_e) over path flows carrying ``demand``.

    Only paths whose edges all have positive investment are usable.  Each
    step moves flow from the costliest used path to the cheapest path by the
    exact line-search amount; it stops once their cost gap is below ``tol``
    relative to the cost level.
    """
    flat = flatten(tree)
    b_vec = flat.vector(b)
    ps = enumerate_paths(tree, max_paths)
    if ps.truncated:
        raise TooManyPaths(f"more than {max_paths} paths")
    paths = ps.paths
    usable = [p for p in paths if all(b_vec[flat.index[e]] > 0 for e in p)]
    zero = {e: 0.0 for e in flat.edge_ids}
    if not usable or demand == 0:
        if demand > 0:
            raise EmptyInvestment("no path with positive investment on every edge")
        return OracleFlows(tuple(usable), np.zeros(len(usable)), zero, np.zeros(len(usable)), 0)

    incid = np.zeros((len(usable), flat.n_edges))
    for p, path in enumerate(usable):
        incid[p, [flat.index[e] for e in path]] = 1.0
    inv_b = np.where(b_vec > 0, 1.0 / np.where(b_vec > 0, b_vec, 1.0), 0.0)
    x = np.full(len(usable), demand / len(usable))
    it = 0
    for it in range(1, max_iter + 1):
        f = x @ incid
        costs = incid @ (f * inv_b)
        used = x > 0
        p = int(np.argmax(np.where(used, costs, -np.inf)))
        q = int(np.argmin(costs))
        gap = costs[p] - costs[q]
        if gap <= tol * max(1.0, costs[q]):
            break
        sym = (incid[p] != incid[q])
        t = min(gap / float(inv_b[sym].sum()), x[p])
        x[p] -= t
        x[q] += t
    f = x @ incid
    costs = incid @ (f * inv_b)
    return OracleFlows(tuple(usable), x, dict(zip(flat.edge_ids, f.tolist())), costs, it)


def wardrop_oracle_trial(seed: int, tree: SPTree | None = None, res: ReservationSpec | None = None,
                         max_paths: int = 8) -> TrialRecord:
    """Compare compositional Wardrop flows with the potential minimizer.

    Tree, investments and reservation are drawn from ``seed`` unless given.
    """
    rng = np.random.default_rng([seed, 2])
    if tree is None:
        tree = random_tree(rng, max_paths=max_paths)
    flat = flatten(tree)
    b_vec = rng.uniform(0.1, 3.0, size=flat.n_edges)
    if res is None:
        res = random_reservation(rng)
    sigma, _, _, unit = unit_solution(flat, b_vec)
    demand = solve_demand(sigma, res)
    flows = demand * unit
    oracle = beckmann_oracle(tree, b_vec, demand, max_paths=max_paths)
    o_vec = np.array([oracle.edge_flows[e] for e in flat.edge_ids])
    flow_err = float(np.max(np.abs(flows - o_vec))) if flat.n_edges else 0.0
    used = oracle.path_flows > 1e-12 * max(1.0, demand)
    comp_costs = np.array([sum(flows[flat.index[e]] / b_vec[flat.index[e]] for e in p)
                           for p in oracle.paths])
    level = sigma * demand
    cost_err = float(np.max(np.abs(comp_costs[used] - level))) if used.any() else 0.0
    ok = flow_err <= 1e-6 and cost_err <= 1e-9 * max(1.0, level)
    return TrialRecord(seed, instance_hash(tree, res, b_vec), "wardrop", -1, "beckmann",
                       0.0, flow_err, demand, float(oracle.path_flows.sum()), True, ok,
                       "" if ok else f"flow_err={flow_err:.3e} cost_err={cost_err:.3e}")


# ---------------------------------------------------------------------------
# equilibrium trials

def sample_equilibrium_point(report, rng: np.random.Generator) -> tuple:
    """A random member of the reported equilibrium set (reduced scalars)."""
    n = report.n
    if report.kind == "unique-point":
        return report.investments
    if report.kind == "interval-set":
        lo = report.bounds[0]
        spare = report.total - n * lo
        return tuple(lo + spare * rng.dirichlet(np.ones(n)))
    if report.kind == "all-below-threshold":
        total = rng.uniform(0.0, report.total_bounds[1])
        return tuple(total * rng.dirichlet(np.ones(n)))
    raise ValueError(f"no equilibrium to sample ({report.kind})")


def equilibrium_trial(tree: SPTree, n: int, res: ReservationSpec, seed: int,
                      eps: float = 1e-6, grid: int = 512, rounds: int = 200) -> TrialRecord:
    """Embed a sampled equilibrium on ``tree`` and search one provider's deviations.

    Without an equilibrium, the trial instead confirms that a monopolist's
    profit strictly improves as its investment shrinks.
    """
    rng = np.random.default_rng([seed, 3])
    k = shortest_path_length(tree)
    report = spne(k, n, res, check=False)
    tag = instance_hash(tree, res)
    if not report.exists:
        x = float(rng.uniform(1e-6, 10.0))
        improves = own_profit(x / 2, 0.0, k, res) > own_profit(x, 0.0, k, res)
        return TrialRecord(seed, tag, "no-equilibrium", 0, "halving", 0.0, 0.0, 0.0, 0.0, True,
                           improves, "" if improves else f"halving b={x} does not improve profit")
    point = sample_equilibrium_point(report, rng)
    b = embed_scalar_on_shortest_paths(tree, point, seed=int(rng.integers(2 ** 31))).to_matrix(tree)
    i = seed % n
    dev = best_response_gap(tree, b, res, i, grid=grid, rounds=rounds)
    ok = dev.gap <= eps
    demand = profit_vector(flatten(tree), np.asarray(b.values), res)[1]
    return TrialRecord(seed, tag, "equilibrium", i, dev.method, 0.0, dev.gap, demand, demand,
                       dev.demand_preserving, ok, "" if ok else f"provider {i} gains {dev.gap:.3e}")
