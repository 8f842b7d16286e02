"""Closed-form subgame perfect equilibria, social optima and inefficiency ratios.

Everything here works in the reduced game: provider ``i`` is described by
the scalar ``b_i`` it places on shortest paths, and ``k`` is the number of
edges of a shortest s-t path.  Each closed form is cross-checked against a
numerical optimization of the underlying profit or welfare function; a
disagreement raises :class:`~netinvest.errors.ClosedFormMismatch`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ClosedFormMismatch, DivergentWelfare, UnsupportedReservation
from .market import embed_scalar_on_shortest_paths, profit, social_welfare
from .optimize import grid_golden_max
from .sp_graph import SPTree, path_tree, shortest_path_length
from .wardrop import Homogeneous, PowerLaw, ReservationSpec, solve_demand

INF = math.inf
CHECK_TOL = 1e-9


# ---------------------------------------------------------------------------
# scalar building blocks of the reduced game

def own_profit(x: float, others: float, k: int, res: ReservationSpec) -> float:
    """Profit of a provider investing ``x`` while the others invest ``others`` in total."""
    if x <= 0:
        return 0.0
    total = x + others
    if isinstance(res, Homogeneous):
        return k * x * (min(res.R ** 2 / k ** 2, res.d ** 2 / total ** 2) - 1.0)
    if isinstance(res, PowerLaw):
        a = res.alpha
        return x * (total ** (-2.0 / (a + 1)) * k ** ((1.0 - a) / (a + 1)) - k)
    raise UnsupportedReservation(type(res).__name__)


def total_profit(total: float, k: int, res: ReservationSpec) -> float:
    return own_profit(total, 0.0, k, res)


def scalar_demand(total: float, k: int, res: ReservationSpec) -> float:
    if total <= 0:
        return 0.0
    return solve_demand(k / total, res)


def scalar_welfare(total: float, k: int, res: ReservationSpec) -> float:
    return res.integral(scalar_demand(total, k, res)) - k * total


def _natural_scale(k: int, res: ReservationSpec) -> float:
    if isinstance(res, Homogeneous):
        return max(res.d, 1e-12)
    return k ** (-res.alpha)


def _ratio(num: float, den: float) -> float:
    """num/den with the 0/0 = 1 convention."""
    if num == 0 and den == 0:
        return 1.0
    if den == 0:
        return INF
    return num / den


def _close(a: float, b: float, tol: float = CHECK_TOL) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class EquilibriumReport:
    exists: bool
    kind: str
    case: str
    k: int
    n: int
    investments: tuple | None = None
    total: float | None = None
    total_bounds: tuple | None = None
    bounds: tuple | None = None
    demand: float | None = None
    welfare: float | None = None
    profits: tuple | None = None
    total_profit: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("investments", "total_bounds", "bounds", "profits"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


@dataclass(frozen=True)
class Optimum:
    total: float
    value: float


@dataclass(frozen=True)
class InefficiencyReport:
    poa: float | None
    pos: float | None
    ppoa: float
    ppos: float
    opt_welfare: float | None
    opt_profit: float
    eq_welfare: float | None
    eq_profit: float | None
    recomputed_poa: float | None
    recomputed_ppoa: float
    case: str

    def to_dict(self) -> dict:
        return asdict(self)


def _fill(k: int, n: int, res: ReservationSpec, investments: tuple) -> dict:
    total = float(sum(investments))
    welfare = None
    try:
        welfare = scalar_welfare(total, k, res)
    except DivergentWelfare:
        pass
    profits = tuple(own_profit(b, total - b, k, res) for b in investments)
    return dict(
        investments=tuple(float(b) for b in investments),
        demand=scalar_demand(total, k, res),
        welfare=welfare,
        profits=profits,
        total_profit=float(sum(profits)),
    )


def _check_best_responses(k: int, res: ReservationSpec, investments, label: str) -> None:
    total = sum(investments)
    hi = 4.0 * max(total, _natural_scale(k, res)) + 1.0
    seen = set()
    for b in investments:
        if b in seen:
            continue
        seen.add(b)
        others = total - b
        current = own_profit(b, others, k, res)
        _, best = grid_golden_max(lambda x: own_profit(x, others, k, res), 0.0, hi)
        if best - current > CHECK_TOL * max(1.0, abs(current)):
            raise ClosedFormMismatch(
                f"{label}: provider at b={b!r} can gain {best - current:.3e} by deviating")


# ---------------------------------------------------------------------------
# equilibria

def spne_homogeneous(k: int, n: int, R: float, d: float, check: bool = True) -> EquilibriumReport:
    """Equilibria for users with common willingness to pay ``R`` and population ``d``."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    res = Homogeneous(R, d)
    threshold = d * k / R if R > 0 else 0.0

    if R < k:
        inv = (0.0,) * n
        rep = EquilibriumReport(True, "unique-point", "negative-margin", k, n, total=0.0,
                                total_bounds=(0.0, 0.0), bounds=(0.0, 0.0), **_fill(k, n, res, inv))
        if check:
            _check_best_responses(k, res, inv, "R<k")
        return rep

    if R == k:
        inv = (0.0,) * n
        rep = EquilibriumReport(True, "all-below-threshold", "zero-margin", k, n, total=None,
                                total_bounds=(0.0, threshold), bounds=(0.0, threshold),
                                **_fill(k, n, res, inv))
        if check:
            _check_best_responses(k, res, inv, "R=k")
            _check_best_responses(k, res, (threshold,) + (0.0,) * (n - 1), "R=k extreme")
        return rep

    if n == 1:
        inv = (threshold,)
        rep = EquilibriumReport(True, "unique-point", "monopoly", k, n, total=threshold,
                                total_bounds=(threshold, threshold), bounds=(threshold, threshold),
                                **_fill(k, n, res, inv))
        if check:
            _check_best_responses(k, res, inv, "monopoly")
        return rep

    root = math.sqrt((n - 2) / n)
    ratio = k / R
    if math.isclose(root, ratio, rel_tol=1e-12, abs_tol=0.0):
        b = d * k / (n * R)
        inv = (b,) * n
        rep = EquilibriumReport(True, "unique-point", "boundary", k, n, total=threshold,
                                total_bounds=(threshold, threshold), bounds=(b, b),
                                **_fill(k, n, res, inv))
    elif root > ratio:
        b = d * math.sqrt((n - 2) / n ** 3)
        inv = (b,) * n
        rep = EquilibriumReport(True, "unique-point", "interior", k, n, total=n * b,
                                total_bounds=(n * b, n * b), bounds=(b, b),
                                **_fill(k, n, res, inv))
    else:
        lower = d * k * (R ** 2 - k ** 2) / (2 * R ** 3)
        upper = threshold - (n - 1) * lower
        inv = (threshold / n,) * n
        rep = EquilibriumReport(True, "interval-set", "kink", k, n, total=threshold,
                                total_bounds=(threshold, threshold), bounds=(lower, upper),
                                **_fill(k, n, res, inv))
        if check:
            rest = (threshold - lower) / (n - 1)
            _check_best_responses(k, res, (lower,) + (rest,) * (n - 1), "kink lower end")
    if check:
        _check_best_responses(k, res, inv, rep.case)
    return rep


def spne_powerlaw(k: int, n: int, alpha: float, check: bool = True) -> EquilibriumReport:
    """Equilibrium for reservation function u(x) = x^(-1/alpha)."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    res = PowerLaw(alpha)
    if n == 1 and alpha <= 1:
        if check:
            _check_no_monopoly(k, res)
        return EquilibriumReport(False, "none", "no-best-response", k, n)
    b = (1.0 / n) * (1.0 - 2.0 / ((alpha + 1) * n)) ** ((alpha + 1) / 2) / k ** alpha
    inv = (b,) * n
    rep = EquilibriumReport(True, "unique-point", "monopoly" if n == 1 else "symmetric", k, n,
                            total=n * b, total_bounds=(n * b, n * b), bounds=(b, b),
                            **_fill(k, n, res, inv))
    if check:
        _check_best_responses(k, res, inv, rep.case)
    return rep


def _check_no_monopoly(k: int, res: PowerLaw) -> None:
    # every positive investment is beaten by half of it
    for x in (10.0 ** -j for j in range(0, 12)):
        if not own_profit(x / 2, 0.0, k, res) > own_profit(x, 0.0, k, res):
            raise ClosedFormMismatch(f"monopoly profit not improving towards 0 at b={x}")


def spne(k: int, n: int, res: ReservationSpec, check: bool = True) -> EquilibriumReport:
    if isinstance(res, Homogeneous):
        return spne_homogeneous(k, n, res.R, res.d, check=check)
    if isinstance(res, PowerLaw):
        return spne_powerlaw(k, n, res.alpha, check=check)
    raise UnsupportedReservation("no closed-form equilibrium for piecewise-linear reservation functions")


# ---------------------------------------------------------------------------
# optima

def social_optimum(k: int, res: ReservationSpec, check: bool = True) -> Optimum:
    """Welfare-maximizing total investment and the optimal welfare."""
    if isinstance(res, Homogeneous):
        R, d = res.R, res.d
        opt = Optimum(0.0, 0.0) if R <= k else Optimum(d * k / R, d * (R - k ** 2 / R))
    elif isinstance(res, PowerLaw):
        a = res.alpha
        if a <= 1:
            raise DivergentWelfare(f"welfare diverges for alpha={a} <= 1")
        total = (a / (a + 1)) ** ((a + 1) / 2) * k ** (-a)
        value = (a / (a + 1)) ** ((a - 1) / 2) * k ** (1 - a) * 2 * a / ((a - 1) * (a + 1))
        opt = Optimum(total, value)
    else:
        raise UnsupportedReservation("no closed-form optimum for piecewise-linear reservation functions")
    if check:
        hi = 4.0 * _natural_scale(k, res) + 1.0
        _, best = grid_golden_max(lambda t: scalar_welfare(t, k, res), 0.0, hi)
        at_opt = scalar_welfare(opt.total, k, res)
        if not (_close(at_opt, opt.value) and best - opt.value <= CHECK_TOL * max(1.0, abs(opt.value))):
            raise ClosedFormMismatch(f"social optimum {opt} vs numerical maximum {best}")
    return opt


def optimal_total_profit(k: int, res: ReservationSpec, check: bool = True) -> Optimum:
    """Supremum of total provider profit over all investment levels.

    For power-law users with alpha <= 1 the supremum is approached as the
    investment tends to 0 and is not attained; ``total`` is then 0.
    """
    if isinstance(res, Homogeneous):
        R, d = res.R, res.d
        opt = Optimum(0.0, 0.0) if R <= k else Optimum(d * k / R, d * (R ** 2 - k ** 2) / R)
    elif isinstance(res, PowerLaw):
        a = res.alpha
        if a < 1:
            opt = Optimum(0.0, INF)
        elif a == 1:
            opt = Optimum(0.0, 1.0)
        else:
            total = (1 - 2 / (a + 1)) ** ((a + 1) / 2) / k ** a
            opt = Optimum(total, (1 - 2 / (a + 1)) ** ((a - 1) / 2) * k ** (1 - a) * 2 / (a + 1))
    else:
        raise UnsupportedReservation("no closed-form profit optimum for piecewise-linear reservation functions")
    if check:
        if math.isinf(opt.value):
            vals = [total_profit(10.0 ** -j, k, res) for j in range(2, 40, 4)]
            ok = all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] > 1e3
        elif isinstance(res, PowerLaw) and res.alpha == 1:
            ok = _close(total_profit(1e-15, k, res), 1.0)
        else:
            hi = 4.0 * _natural_scale(k, res) + 1.0
            _, best = grid_golden_max(lambda t: total_profit(t, k, res), 0.0, hi)
            ok = _close(total_profit(opt.total, k, res), opt.value) and best - opt.value <= CHECK_TOL * max(1.0, opt.value)
        if not ok:
            raise ClosedFormMismatch(f"profit optimum {opt} failed its numerical check")
    return opt


# ---------------------------------------------------------------------------
# inefficiency

def poa_formula_homogeneous(k: int, n: int, R: float, d: float) -> tuple[float, float]:
    """(PoA, PPoA) closed forms for homogeneous users."""
    if d > 0 and R > k and n >= 2:
        root = math.sqrt((n - 2) / n)
        if root >= k / R or math.isclose(root, k / R, rel_tol=1e-12):
            poa = (R + k) * (R - k) / (R * (R - k * root))
            ppoa = n * root * (R ** 2 - k ** 2) / (2 * R * k)
            return poa, ppoa
    return 1.0, 1.0


def poa_formula_powerlaw(n: int, alpha: float) -> float:
    a = alpha
    return (a * n / (n * (a + 1) - 2)) ** ((a - 1) / 2) * 2 * a * n / (n * (a + 1) + 2 * (a - 1))


def ppoa_formula_powerlaw(n: int, alpha: float) -> float:
    if n == 1:
        return INF if alpha <= 1 else 1.0
    if alpha < 1:
        return INF
    if alpha == 1:
        return float(n)
    return n * (((alpha + 1) * n - 2) / (n * (alpha - 1))) ** ((1 - alpha) / 2)


def inefficiency(k: int, n: int, res: ReservationSpec, tree: SPTree | None = None,
                 check: bool = True, seed: int = 0) -> InefficiencyReport:
    """PoA/PoS/PPoA/PPoS from the closed forms, each recomputed from scratch.

    The recomputation embeds the equilibrium and the optima on ``tree``
    (default: a single path of ``k`` edges) and evaluates welfare and
    profits through the full Wardrop machinery.
    """
    if tree is None:
        tree = path_tree(k)
    elif shortest_path_length(tree) != k:
        raise ValueError("tree's shortest path length differs from k")

    eq = spne(k, n, res, check=check)
    prof_opt = optimal_total_profit(k, res, check=check)
    welfare_defined = not (isinstance(res, PowerLaw) and res.alpha <= 1)
    sw_opt = social_optimum(k, res, check=check) if welfare_defined else None

    if isinstance(res, Homogeneous):
        poa, ppoa = poa_formula_homogeneous(k, n, res.R, res.d)
    else:
        poa = (poa_formula_powerlaw(n, res.alpha) if eq.exists else INF) if welfare_defined else None
        ppoa = ppoa_formula_powerlaw(n, res.alpha)

    # independent recomputation on the tree
    eq_welfare = eq_profit = None
    if eq.exists:
        b_eq = embed_scalar_on_shortest_paths(tree, eq.investments, seed=seed).to_matrix(tree)
        eq_profit = profit(tree, b_eq, res).total
        if welfare_defined:
            eq_welfare = social_welfare(tree, b_eq, res)
    if math.isinf(prof_opt.value):
        opt_profit_re = INF
    elif prof_opt.total == 0 and prof_opt.value > 0:
        # supremum approached as investment -> 0
        tiny = embed_scalar_on_shortest_paths(tree, [1e-15], seed=seed).to_matrix(tree)
        opt_profit_re = profit(tree, tiny, res).total
    else:
        b_opt = embed_scalar_on_shortest_paths(tree, [prof_opt.total], seed=seed).to_matrix(tree)
        opt_profit_re = profit(tree, b_opt, res).total
    ppoa_re = _ratio(opt_profit_re, eq_profit) if eq.exists else INF

    poa_re = None
    if welfare_defined:
        if eq.exists:
            b_sw = embed_scalar_on_shortest_paths(tree, [sw_opt.total], seed=seed).to_matrix(tree)
            poa_re = _ratio(social_welfare(tree, b_sw, res), eq_welfare)
        else:
            poa_re = INF

    for name, closed, again in (("PoA", poa, poa_re), ("PPoA", ppoa, ppoa_re)):
        if closed is None:
            continue
        if not _close(closed, again, 1e-9 if math.isfinite(closed) else 0):
            raise ClosedFormMismatch(f"{name}: closed form {closed!r} vs recomputed {again!r}")

    return InefficiencyReport(
        poa=poa, pos=poa, ppoa=ppoa, ppos=ppoa,
        opt_welfare=sw_opt.value if sw_opt else None,
        opt_profit=prof_opt.value,
        eq_welfare=eq_welfare, eq_profit=eq_profit,
        recomputed_poa=poa_re, recomputed_ppoa=ppoa_re,
        case=eq.case,
    )
