"""Compare the compiled and pure-Python tree solvers.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times one unit-flow solve on random trees of growing size, plus a full
best-response search (the verification hot loop) with each backend.
"""
import argparse
import time

import numpy as np

from netinvest import _kernels_py, kernels
from netinvest.equilibria import spne_powerlaw
from netinvest.market import embed_scalar_on_shortest_paths
from netinvest.sp_graph import Edge, Parallel, Series, flatten, path_tree
from netinvest.verify import best_response_gap
from netinvest.wardrop import PowerLaw


def balanced_tree(depth: int, arity: int = 3, counter=None):
    counter = counter if counter is not None else iter(range(10 ** 9))
    if depth == 0:
        return Edge(f"e{next(counter)}")
    kids = tuple(balanced_tree(depth - 1, arity, counter) for _ in range(arity))
    return (Series if depth % 2 else Parallel)(kids)


def time_solver(flat, b, solver, repeat):
    start = time.perf_counter()
    for _ in range(repeat):
        kernels.unit_solution(flat, b, solver=solver)
    return (time.perf_counter() - start) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=2000)
    args = parser.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the pure-Python backend can be timed")
    compiled = kernels.solve_tree
    rng = np.random.default_rng(0)

    print(f"{'edges':>7} {'python us':>11} {'cython us':>11} {'speedup':>8}")
    for depth in (2, 3, 4, 5, 6):
        tree = balanced_tree(depth)
        flat = flatten(tree)
        b = rng.uniform(0.1, 2.0, flat.n_edges)
        repeat = max(20, args.repeat // flat.n_edges)
        t_py = time_solver(flat, b, _kernels_py.solve_tree, repeat)
        t_cy = time_solver(flat, b, compiled, repeat)
        print(f"{flat.n_edges:7d} {t_py * 1e6:11.1f} {t_cy * 1e6:11.1f} {t_py / t_cy:8.1f}")

    tree = Parallel((path_tree(3, "a"), path_tree(3, "b"), path_tree(4, "c")))
    eq = spne_powerlaw(3, 3, 2.0, check=False)
    b = embed_scalar_on_shortest_paths(tree, eq.investments, seed=1).to_matrix(tree)
    res = PowerLaw(2.0)
    timings = {}
    for name, solver in (("python", _kernels_py.solve_tree), ("cython", compiled)):
        kernels.solve_tree = solver
        start = time.perf_counter()
        gap = best_response_gap(tree, b, res, 0).gap
        timings[name] = time.perf_counter() - start
        print(f"best_response_gap [{name}]: {timings[name] * 1e3:8.1f} ms (gap {gap:.2e})")
    kernels.solve_tree = compiled
    print(f"end-to-end speedup: {timings['python'] / timings['cython']:.2f}x")


if __name__ == "__main__":
    main()
