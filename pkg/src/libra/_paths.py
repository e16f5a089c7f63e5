"""Bounded single-source shortest paths on CSR graphs, compiled with numba.

scipy's dijkstra pays a per-source cost proportional to the graph size; the
matcher only ever needs a few hops around each defect.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _push(hd, hn, size, d, v):
    i = size
    hd[i] = d
    hn[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if hd[p] <= hd[i]:
            break
        hd[p], hd[i] = hd[i], hd[p]
        hn[p], hn[i] = hn[i], hn[p]
        i = p
    return size + 1


@njit(cache=True)
def _pop(hd, hn, size):
    d, v = hd[0], hn[0]
    size -= 1
    hd[0] = hd[size]
    hn[0] = hn[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        if left + 1 < size and hd[left + 1] < hd[left]:
            c = left + 1
        if hd[i] <= hd[c]:
            break
        hd[c], hd[i] = hd[i], hd[c]
        hn[c], hn[i] = hn[i], hn[c]
        i = c
    return d, v, size


@njit(cache=True)
def bounded_dijkstra(indptr, indices, data, sources, limit, barrier, modulus):
    """Distance and predecessor rows from each source; nodes beyond ``limit`` stay at inf / -9999.

    Nodes ``v`` with ``v % modulus == barrier`` are reached but never expanded
    (``barrier = -1`` disables this).
    """
    n = indptr.shape[0] - 1
    k = sources.shape[0]
    dist = np.full((k, n), np.inf)
    pred = np.full((k, n), -9999, dtype=np.int64)
    cap = indices.shape[0] + 1
    hd = np.empty(cap)
    hn = np.empty(cap, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    for r in range(k):
        s = sources[r]
        drow = dist[r]
        prow = pred[r]
        drow[s] = 0.0
        size = _push(hd, hn, 0, 0.0, s)
        nt = 0
        while size > 0:
            d, u, size = _pop(hd, hn, size)
            if done[u] or d > drow[u]:
                continue
            done[u] = True
            touched[nt] = u
            nt += 1
            if u % modulus == barrier and u != s:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                nd = d + data[e]
                if nd < drow[v] and nd <= limit:
                    drow[v] = nd
                    prow[v] = u
                    size = _push(hd, hn, size, nd, v)
        for t in range(nt):
            done[touched[t]] = False
    return dist, pred
