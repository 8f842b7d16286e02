"""Command-line interface.

Subcommands ``wardrop``, ``spne``, ``poa``, ``sweep`` and ``verify`` read a
JSON instance file ``{"graph": ..., "providers": n, "reservation": ...}``.
Exit codes: 0 success, 1 a verification trial failed, 2 malformed input or
flags, 3 input that parses but is semantically invalid.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .equilibria import inefficiency, spne
from .errors import (
    DivergentWelfare, NetInvestError, PreconditionViolated, TreeSyntaxError, UnknownEdge,
    UnsupportedReservation,
)
from .market import InvestmentMatrix, embed_scalar_on_shortest_paths
from .sp_graph import SPTree, count_paths, parse_tree, path_tree, shortest_path_length, to_dict
from .verify import equilibrium_trial, has_non_shortest_structure, theorem_trial, wardrop_oracle_trial
from .wardrop import (
    Homogeneous, PowerLaw, ReservationSpec, reservation_from_dict, reservation_to_dict,
    wardrop_outcome,
)

EXIT_FAILED, EXIT_PARSE, EXIT_SEMANTIC = 1, 2, 3

SWEEP_PARAMS = ("n", "k", "R", "d", "alpha")
SWEEP_COLUMNS = SWEEP_PARAMS + (
    "exists", "case", "total", "bound_lo", "bound_hi", "eq_welfare", "eq_profit",
    "opt_welfare", "opt_profit", "poa", "pos", "ppoa", "ppos",
)


def _message(exc: Exception) -> str:
    # KeyError subclasses repr() their argument in str()
    return str(exc.args[0]) if exc.args else type(exc).__name__


class ParseFailure(Exception):
    pass


class SemanticFailure(Exception):
    pass


@dataclass(frozen=True)
class Instance:
    graph: SPTree
    providers: int
    reservation: ReservationSpec

    def to_dict(self) -> dict:
        return {"graph": to_dict(self.graph), "providers": self.providers,
                "reservation": reservation_to_dict(self.reservation)}


# ---------------------------------------------------------------------------
# input

def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseFailure(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}: invalid JSON ({exc})") from exc


def instance_from_dict(obj) -> Instance:
    if not isinstance(obj, dict):
        raise ParseFailure("instance must be a JSON object")
    for key in ("graph", "providers", "reservation"):
        if key not in obj:
            raise ParseFailure(f"instance is missing {key!r}")
    try:
        graph = parse_tree(obj["graph"])
    except TreeSyntaxError as exc:
        raise ParseFailure(f"graph: {exc}") from exc
    n = obj["providers"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseFailure("providers must be an integer >= 1")
    try:
        res = reservation_from_dict(obj["reservation"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseFailure(f"reservation: {exc}") from exc
    return Instance(graph, n, res)


def load_instance(path: str) -> Instance:
    return instance_from_dict(_read_json(path))


def load_investments(path: str, inst: Instance, seed: int = 0) -> InvestmentMatrix:
    """Investment file: ``{"mode": "edge"|"scalar", "investments": ...}``.

    ``edge`` maps provider index to ``{edge_id: amount}``; ``scalar`` lists
    one amount per provider, spread over shortest paths.
    """
    obj = _read_json(path)
    if not isinstance(obj, dict) or "investments" not in obj:
        raise ParseFailure("investment file needs an 'investments' entry")
    mode = obj.get("mode", "edge")
    inv = obj["investments"]
    try:
        if mode == "edge":
            if not isinstance(inv, dict):
                raise ParseFailure("edge-mode investments must be an object")
            rows = {int(i): r for i, r in inv.items()}
            return InvestmentMatrix.from_mapping(inst.graph, rows, inst.providers)
        if mode == "scalar":
            if not isinstance(inv, list):
                raise ParseFailure("scalar-mode investments must be a list")
            if len(inv) != inst.providers:
                raise SemanticFailure(f"expected {inst.providers} scalars, got {len(inv)}")
            return embed_scalar_on_shortest_paths(inst.graph, [float(x) for x in inv], seed).to_matrix(inst.graph)
    except (UnknownEdge, IndexError) as exc:
        raise SemanticFailure(_message(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ParseFailure(f"investments: {exc}") from exc
    raise ParseFailure(f"unknown investment mode {mode!r}")


# ---------------------------------------------------------------------------
# output

def jsonable(obj):
    """Plain JSON types with +-inf as the strings "inf"/"-inf"."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def from_jsonable(value):
    """Inverse of :func:`jsonable` for scalar fields."""
    if value == "inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    return value


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def _workers(jobs: int) -> int:
    cap = os.environ.get("NIG_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ParseFailure(f"NIG_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(limit, jobs))


def _ordered_map(fn, items: list) -> list:
    """Map in input order, in worker processes when more than one is allowed."""
    workers = _workers(len(items))
    if workers == 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------------------
# commands

def cmd_wardrop(args) -> int:
    inst = load_instance(args.instance)
    b = load_investments(args.investments, inst, args.seed)
    outcome = wardrop_outcome(inst.graph, b.edge_totals, inst.reservation)
    _emit(_dump(outcome.to_dict()), args.out)
    return 0


def _require_closed_form(res: ReservationSpec) -> None:
    if not isinstance(res, (Homogeneous, PowerLaw)):
        raise SemanticFailure("closed-form analysis needs a homogeneous or powerlaw reservation")


def cmd_spne(args) -> int:
    inst = load_instance(args.instance)
    _require_closed_form(inst.reservation)
    k = shortest_path_length(inst.graph)
    report = spne(k, inst.providers, inst.reservation, check=not args.no_check)
    _emit(_dump(report.to_dict()), args.out)
    return 0


def cmd_poa(args) -> int:
    inst = load_instance(args.instance)
    _require_closed_form(inst.reservation)
    k = shortest_path_length(inst.graph)
    report = inefficiency(k, inst.providers, inst.reservation, tree=inst.graph,
                          check=not args.no_check, seed=args.seed)
    _emit(_dump(report.to_dict()), args.out)
    return 0


def parse_grid(spec: str) -> tuple[str, list]:
    """``name=a:b`` (inclusive integer range), ``name=a:b:step`` or ``name=v1,v2,...``."""
    name, sep, body = spec.partition("=")
    name = name.strip()
    if not sep or name not in SWEEP_PARAMS:
        raise ParseFailure(f"bad grid {spec!r}; expected one of {', '.join(SWEEP_PARAMS)} as name=values")
    body = body.strip()
    try:
        if ":" in body:
            parts = [float(p) for p in body.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0:
                raise ValueError
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values = [lo + j * step for j in range(max(count, 0))]
        else:
            values = [float(v) for v in body.split(",") if v.strip()]
    except ValueError:
        raise ParseFailure(f"bad grid values in {spec!r}") from None
    if name in ("n", "k"):
        if any(v != int(v) or v < 1 for v in values):
            raise ParseFailure(f"{name} must take integer values >= 1")
        values = [int(v) for v in values]
    if not values:
        raise ParseFailure(f"grid {spec!r} is empty")
    return name, values


def _sweep_row(point: tuple) -> dict:
    inst_dict, params, check = point
    inst = instance_from_dict(inst_dict)
    n = params.get("n", inst.providers)
    res = inst.reservation
    if isinstance(res, Homogeneous):
        res = Homogeneous(params.get("R", res.R), params.get("d", res.d))
    else:
        res = PowerLaw(params.get("alpha", res.alpha))
    tree = path_tree(params["k"]) if "k" in params else inst.graph
    k = shortest_path_length(tree)
    eq = spne(k, n, res, check=check)
    ineff = inefficiency(k, n, res, tree=tree, check=check)
    row = {
        "n": n, "k": k,
        "R": res.R if isinstance(res, Homogeneous) else None,
        "d": res.d if isinstance(res, Homogeneous) else None,
        "alpha": res.alpha if isinstance(res, PowerLaw) else None,
        "exists": eq.exists, "case": eq.case, "total": eq.total,
        "bound_lo": eq.bounds[0] if eq.bounds else None,
        "bound_hi": eq.bounds[1] if eq.bounds else None,
        "eq_welfare": ineff.eq_welfare, "eq_profit": ineff.eq_profit,
        "opt_welfare": ineff.opt_welfare, "opt_profit": ineff.opt_profit,
        "poa": ineff.poa, "pos": ineff.pos, "ppoa": ineff.ppoa, "ppos": ineff.ppos,
    }
    return row


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def cmd_sweep(args) -> int:
    inst = load_instance(args.instance)
    _require_closed_form(inst.reservation)
    if not args.grid:
        raise ParseFailure("sweep needs at least one --grid")
    axes = [parse_grid(g) for g in args.grid]
    names = [a for a, _ in axes]
    if len(set(names)) != len(names):
        raise ParseFailure("a parameter appears in more than one --grid")
    allowed = {"n", "k", "R", "d"} if isinstance(inst.reservation, Homogeneous) else {"n", "k", "alpha"}
    for name in names:
        if name not in allowed:
            raise ParseFailure(f"{name} does not apply to a {type(inst.reservation).__name__} reservation")
    base = inst.to_dict()
    points = [(base, dict(zip(names, combo)), not args.no_check)
              for combo in itertools.product(*(v for _, v in axes))]
    rows = _ordered_map(_sweep_row, points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_csv_cell(row[c]) for c in SWEEP_COLUMNS])
    _emit(buf.getvalue(), args.out)
    return 0


def _verify_trial(job: tuple) -> list[dict]:
    inst_dict, seed, eps = job
    inst = instance_from_dict(inst_dict)
    tree, n, res = inst.graph, inst.providers, inst.reservation
    records = []
    if isinstance(res, (Homogeneous, PowerLaw)):
        records.append(equilibrium_trial(tree, n, res, seed, eps=eps))
    if has_non_shortest_structure(tree):
        records.append(theorem_trial(tree, seed, res, n))
    if count_paths(tree) <= 8:
        records.append(wardrop_oracle_trial(seed, tree, res))
    return [r.to_dict() for r in records]


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    if args.trials < 1:
        raise ParseFailure("--trials must be >= 1")
    if not args.eps > 0:
        raise ParseFailure("--eps must be positive")
    jobs = [(inst.to_dict(), args.seed + t, args.eps) for t in range(args.trials)]
    records = [r for batch in _ordered_map(_verify_trial, jobs) for r in batch]
    _emit(_dump(records), args.out)
    failed = [r for r in records if not r["ok"]]
    if failed:
        print(f"{len(failed)} of {len(records)} checks failed", file=sys.stderr)
        return EXIT_FAILED
    return 0


# ---------------------------------------------------------------------------
# entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netinvest", description="Network investment games on series-parallel graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="seed for embeddings and trials (default 0)")

    p = sub.add_parser("wardrop", help="Wardrop flow for given investments")
    common(p)
    p.add_argument("investments", help="investment JSON file")
    p.set_defaults(func=cmd_wardrop)

    for name, func, text in (("spne", cmd_spne, "closed-form equilibrium"),
                             ("poa", cmd_poa, "inefficiency ratios")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--no-check", action="store_true", help="skip numerical cross-checks")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="CSV of reports over a parameter grid")
    common(p)
    p.add_argument("--grid", action="append", default=[],
                   help="name=a:b[:step] or name=v1,v2 with name in n,k,R,d,alpha; repeatable")
    p.add_argument("--no-check", action="store_true", help="skip numerical cross-checks")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="randomized verification trials")
    common(p)
    p.add_argument("--trials", type=int, default=100, help="number of trials (default 100)")
    p.add_argument("--eps", type=float, default=1e-6, help="best-response gap tolerance (default 1e-6)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"netinvest: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SemanticFailure, UnknownEdge, IndexError, UnsupportedReservation,
            DivergentWelfare, PreconditionViolated) as exc:
        print(f"netinvest: {_message(exc)}", file=sys.stderr)
        return EXIT_SEMANTIC
    except NetInvestError as exc:
        print(f"netinvest: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
