"""Numba kernels for the Gray-code enumeration sweep."""

import numpy as np
from numba import njit

# statistic kind codes shared with enumeration.py
KIND_EDGES = 0
KIND_TRIANGLES = 1
KIND_KSTAR = 2
KIND_DEGREE_COUNT = 3


@njit(cache=True, nogil=True)
def gray_sweep(g, ei, ej, p, part_lo, part_hi, kinds, kparam, ck, strides, pop, hist):
    """Sweep all graphs whose first p edges match each partition index in
    [part_lo, part_hi), visiting the remaining edges in reflected Gray-code
    order (one edge flip per step), and accumulate the statistic histogram.

    hist is a flat int64 array indexed by sum(value[s] * strides[s]).
    """
    m = ei.shape[0]
    free = m - p
    ns = kinds.shape[0]
    one = np.int64(1)
    nsteps = one << free
    vals = np.zeros(ns, np.int64)
    rows = np.zeros(g, np.int64)
    deg = np.zeros(g, np.int64)
    for part in range(part_lo, part_hi):
        for i in range(g):
            rows[i] = 0
        for e in range(p):
            if (part >> e) & 1:
                u = ei[e]
                v = ej[e]
                rows[u] |= one << v
                rows[v] |= one << u
        ec = np.int64(0)
        for i in range(g):
            deg[i] = pop[rows[i]]
            ec += deg[i]
        ec //= 2
        tc = np.int64(0)
        for e in range(m):
            u = ei[e]
            v = ej[e]
            if (rows[u] >> v) & 1:
                tc += pop[rows[u] & rows[v]]
        tc //= 3
        for s in range(ns):
            kd = kinds[s]
            if kd == KIND_EDGES:
                vals[s] = ec
            elif kd == KIND_TRIANGLES:
                vals[s] = tc
            elif kd == KIND_KSTAR:
                acc = np.int64(0)
                for i in range(g):
                    acc += ck[s, deg[i]]
                vals[s] = acc
            else:
                kk = kparam[s]
                acc = np.int64(0)
                for i in range(g):
                    if deg[i] == kk:
                        acc += 1
                vals[s] = acc
        idx = np.int64(0)
        for s in range(ns):
            idx += vals[s] * strides[s]
        hist[idx] += 1
        for step in range(1, nsteps):
            b = 0
            while ((step >> b) & 1) == 0:
                b += 1
            e = p + b
            u = ei[e]
            v = ej[e]
            rows[u] ^= one << v
            rows[v] ^= one << u
            if (rows[u] >> v) & 1:
                sgn = one
            else:
                sgn = -one
            cn = pop[rows[u] & rows[v]]
            du0 = deg[u]
            dv0 = deg[v]
            du1 = du0 + sgn
            dv1 = dv0 + sgn
            deg[u] = du1
            deg[v] = dv1
            for s in range(ns):
                kd = kinds[s]
                if kd == KIND_EDGES:
                    vals[s] += sgn
                elif kd == KIND_TRIANGLES:
                    vals[s] += sgn * cn
                elif kd == KIND_KSTAR:
                    vals[s] += ck[s, du1] - ck[s, du0] + ck[s, dv1] - ck[s, dv0]
                else:
                    kk = kparam[s]
                    dlt = np.int64(0)
                    if du1 == kk:
                        dlt += 1
                    if du0 == kk:
                        dlt -= 1
                    if dv1 == kk:
                        dlt += 1
                    if dv0 == kk:
                        dlt -= 1
                    vals[s] += dlt
            idx = np.int64(0)
            for s in range(ns):
                idx += vals[s] * strides[s]
            hist[idx] += 1


def popcount_table(nbits: int = 9) -> np.ndarray:
    """Popcount lookup for masks below 2**nbits."""
    n = 1 << nbits
    t = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        t[i] = t[i >> 1] + (i & 1)
    return t
