# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Wardrop kernel over the post-order arrays of a FlatTree."""
from libc.math cimport INFINITY, isinf


def solve_tree(const int[:] kind, const int[:] child_ptr, const int[:] children,
               const int[:] edge_slot, const double[:] b,
               double[:] slope, double[:] node_flow, double[:] edge_flow):
    """Fill node slopes and per-unit-demand node/edge flows; return the root slope.

    Slopes: edge 1/b_e (inf when b_e <= 0), series sum, parallel harmonic sum
    over finite children.  Flows are for one unit of total demand; parallel
    children receive flow inversely proportional to their slope.
    """
    cdef Py_ssize_t n = kind.shape[0]
    cdef Py_ssize_t v, j, c
    cdef double acc, g, flow, s

    for v in range(n):
        if kind[v] == 0:
            g = b[edge_slot[v]]
            slope[v] = 1.0 / g if g > 0.0 else INFINITY
        elif kind[v] == 1:
            acc = 0.0
            for j in range(child_ptr[v], child_ptr[v + 1]):
                acc += slope[children[j]]
            slope[v] = acc
        else:
            acc = 0.0
            for j in range(child_ptr[v], child_ptr[v + 1]):
                g = slope[children[j]]
                if not isinf(g):
                    acc += 1.0 / g
            slope[v] = 1.0 / acc if acc > 0.0 else INFINITY

    for j in range(edge_flow.shape[0]):
        edge_flow[j] = 0.0
    node_flow[n - 1] = 0.0 if isinf(slope[n - 1]) else 1.0
    for v in range(n - 1, -1, -1):
        flow = node_flow[v]
        if kind[v] == 0:
            edge_flow[edge_slot[v]] = flow
        elif kind[v] == 1:
            for j in range(child_ptr[v], child_ptr[v + 1]):
                node_flow[children[j]] = flow
        else:
            s = slope[v]
            for j in range(child_ptr[v], child_ptr[v + 1]):
                c = children[j]
                g = slope[c]
                if flow == 0.0 or isinf(g):
                    node_flow[c] = 0.0
                else:
                    node_flow[c] = flow * s / g
    return slope[n - 1]
