"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is loaded.  Setting ``NETINVEST_PURE_PYTHON=1`` forces the
fallback (useful for benchmarking and for debugging the kernels).
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("NETINVEST_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    solve_tree = _compiled.solve_tree
    BACKEND = "cython"
else:
    solve_tree = _kernels_py.solve_tree
    BACKEND = "python"


def unit_solution(flat, b, solver=None):
    """Return ``(sigma, node_slope, node_unit_flow, edge_unit_flow)`` for investments ``b``.

    ``b`` is an edge-indexed float vector aligned with ``flat.edge_ids``.
    """
    solver = solver or solve_tree
    n = flat.n_nodes
    slope = np.empty(n)
    node_flow = np.empty(n)
    edge_flow = np.empty(flat.n_edges)
    sigma = solver(flat.kind, flat.child_ptr, flat.children, flat.edge_slot,
                   np.ascontiguousarray(b, dtype=float), slope, node_flow, edge_flow)
    return float(sigma), slope, node_flow, edge_flow
