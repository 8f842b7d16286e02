"""One-dimensional maximizers used for numerical cross-checks."""
from __future__ import annotations

import math
from collections.abc import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-12, max_iter: int = 300) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [lo, hi]; endpoints are also compared."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
    best = max([(f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi)])
    return best[1], best[0]


def grid_golden_max(f: Callable[[float], float], lo: float, hi: float,
                    n_grid: int = 512, tol: float = 1e-12) -> tuple[float, float]:
    """Uniform grid scan, then golden-section refinement around the best cell.

    Robust to kinks and mild multimodality; the grid points themselves are
    candidates, so the result is never worse than the best grid value.
    """
    step = (hi - lo) / (n_grid - 1)
    xs = [lo + j * step for j in range(n_grid)]
    vals = [f(x) for x in xs]
    j = max(range(n_grid), key=vals.__getitem__)
    a = xs[max(j - 1, 0)]
    b = xs[min(j + 1, n_grid - 1)]
    x, fx = golden_max(f, a, b, tol=tol)
    if vals[j] > fx:
        return xs[j], vals[j]
    return x, fx
