"""Pure-Python twin of the compiled kernel in ``_kernels.pyx``."""
import math

INF = math.inf


def solve_tree(kind, child_ptr, children, edge_slot, b, slope, node_flow, edge_flow):
    kind = kind.tolist()
    ptr = child_ptr.tolist()
    kids = children.tolist()
    slot = edge_slot.tolist()
    bv = b.tolist()
    n = len(kind)
    sl = [0.0] * n
    for v in range(n):
        kv = kind[v]
        if kv == 0:
            g = bv[slot[v]]
            sl[v] = 1.0 / g if g > 0.0 else INF
        elif kv == 1:
            sl[v] = sum(sl[c] for c in kids[ptr[v]:ptr[v + 1]])
        else:
            acc = 0.0
            for c in kids[ptr[v]:ptr[v + 1]]:
                g = sl[c]
                if g != INF:
                    acc += 1.0 / g
            sl[v] = 1.0 / acc if acc > 0.0 else INF

    nf = [0.0] * n
    ef = [0.0] * len(bv)
    nf[n - 1] = 0.0 if sl[n - 1] == INF else 1.0
    for v in range(n - 1, -1, -1):
        flow = nf[v]
        kv = kind[v]
        if kv == 0:
            ef[slot[v]] = flow
        elif kv == 1:
            for c in kids[ptr[v]:ptr[v + 1]]:
                nf[c] = flow
        else:
            s = sl[v]
            for c in kids[ptr[v]:ptr[v + 1]]:
                g = sl[c]
                nf[c] = 0.0 if flow == 0.0 or g == INF else flow * s / g
    slope[:] = sl
    node_flow[:] = nf
    edge_flow[:] = ef
    return sl[n - 1]
