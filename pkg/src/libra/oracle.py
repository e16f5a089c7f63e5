"""Exact minimum-weight hypergraph matching, for verification.

``exact_mwhpm`` solves ``H x = S`` over GF(2) and enumerates the whole coset
``x0 + ker H``; it is exact with a deterministic tie-break but exponential in
the kernel dimension.  ``milp_mwhpm`` solves the same problem as an integer
program (``H x - 2 z = S``) and scales to the surface-code models used in
tests, without the lexicographic tie-break.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, List, Tuple

import numpy as np

from .hypergraph import ErrorModel, InfeasibleSyndromeError, LibraError, config_weight, gf2_solve, mask_of, syndrome_of
from .matcher import MatcherResult

class OracleOverflowError(LibraError, RuntimeError):
    pass


@lru_cache(maxsize=32)
def _subset_bits(k: int) -> np.ndarray:
    idx = np.arange(1 << k, dtype=np.int64)
    return ((idx[:, None] >> np.arange(k)) & 1).astype(np.uint8)


def _rows_of(masks: Iterable[int], m: int) -> np.ndarray:
    masks = list(masks)
    out = np.zeros((len(masks), m), dtype=np.uint8)
    for r, x in enumerate(masks):
        for i in range(m):
            if x >> i & 1:
                out[r, i] = 1
    return out


def exact_mwhpm(model: ErrorModel, syndrome, edge_budget: int = 25) -> MatcherResult:
    """Global minimum-weight configuration with ``syndrome_of == syndrome``.

    Among minimal-weight solutions (within 1e-9 relative) the lexicographically
    smallest sorted index list wins.
    """
    m = len(model.edges)
    if m > edge_budget:
        raise OracleOverflowError(f"model has {m} edges, oracle budget is {edge_budget}")
    x0, kernel = gf2_solve(model.det_masks, mask_of(syndrome))
    k = len(kernel)
    w = model.weights
    base = _rows_of([x0], m)[0]
    kmat = _rows_of(kernel, m)
    best_w = np.inf
    best: List[Tuple[int, ...]] = []
    if k <= 16:
        chunks = [(_subset_bits(k), None)]
    else:
        inner = 16
        chunks = [(_subset_bits(inner), hi) for hi in range(1 << (k - inner))]
    for bits, hi in chunks:
        if hi is None:
            x = (bits.astype(np.int32) @ kmat.astype(np.int32)) & 1
        else:
            inner = bits.shape[1]
            hi_bits = np.array([(hi >> j) & 1 for j in range(k - inner)], dtype=np.int32)
            offset = (hi_bits @ kmat[inner:].astype(np.int32)) & 1
            x = ((bits.astype(np.int32) @ kmat[:inner].astype(np.int32)) + offset) & 1
        x ^= base
        ws = x @ w
        lo = float(ws.min())
        if lo < best_w - 1e-9 * max(1.0, abs(lo)):
            best_w, best = lo, []
        tol = 1e-9 * max(1.0, abs(best_w))
        for r in np.flatnonzero(ws <= best_w + tol):
            best.append(tuple(np.flatnonzero(x[r]).tolist()))
    chosen = frozenset(min(best))
    return MatcherResult(chosen, config_weight(chosen, model), True)


def milp_mwhpm(model: ErrorModel, syndrome) -> MatcherResult:
    """Minimum-weight configuration via mixed-integer programming (HiGHS)."""
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix, hstack

    syndrome = frozenset(syndrome)
    if not syndrome:
        return MatcherResult(frozenset(), 0.0, True)
    m, n = len(model.edges), model.num_detectors
    rows, cols = [], []
    for i, e in enumerate(model.edges):
        rows += list(e.detectors)
        cols += [i] * len(e.detectors)
    h = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, m))
    # number of hyperedges at a detector bounds its z variable
    deg = np.bincount(rows, minlength=n) if rows else np.zeros(n)
    a = hstack([h, coo_matrix(-2.0 * np.eye(n))]).tocsr()
    s = np.zeros(n)
    s[list(syndrome)] = 1.0
    c = np.concatenate([model.weights, np.zeros(n)])
    res = milp(
        c,
        constraints=LinearConstraint(a, s, s),
        integrality=np.ones(m + n),
        bounds=Bounds(np.zeros(m + n), np.concatenate([np.ones(m), np.floor(deg / 2) + 1])),
        options={"mip_rel_gap": 0.0},
    )
    if res.x is None:
        raise InfeasibleSyndromeError(f"integer program failed: {res.message}")
    config = frozenset(np.flatnonzero(res.x[:m] > 0.5).tolist())
    if syndrome_of(config, model) != syndrome:
        raise InfeasibleSyndromeError("integer program returned an inconsistent solution")
    return MatcherResult(config, config_weight(config, model), True)
