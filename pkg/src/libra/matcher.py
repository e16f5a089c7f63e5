"""Correlated minimum-weight matching on the graphlike decomposition of a model.

Hyperedges are split into components of at most two detectors.  Detectors
linked by components form independent *bases* (for the surface code: the
Z-check graph and the X-check graph).  Each basis becomes an undirected graph
with one extra boundary node; parallel contributions to the same detector pair
share a *slot* whose probability is the XOR-combination of its contributors.

Defects are paired exactly (bitmask DP over shortest-path distances) and the
matched slots are turned back into hyperedges.  Correlated decoding rematches
each basis after raising the probability of slots whose partner component was
matched in another basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple
from weakref import WeakKeyDictionary

import numpy as np
from scipy.sparse import csr_matrix

from ._paths import bounded_dijkstra
from .hypergraph import (
    DecompositionError,
    ErrorModel,
    InfeasibleSyndromeError,
    bits_of,
    config_weight,
    gf2_solve,
    mask_of,
    observable_of,
)

EXACT_DEFECT_LIMIT = 22
# realisation groups with a larger solution coset use the greedy rule
REALISE_KERNEL_LIMIT = 10
_P_MAX = 0.5 - 1e-9
_INF = math.inf


def _xor_prob(ps) -> float:
    acc = 1.0
    for p in ps:
        acc *= 1.0 - 2.0 * p
    return 0.5 * (1.0 - acc)


def _slot_weight(q: float) -> float:
    q = min(q, _P_MAX)
    return math.log1p((1.0 - 2.0 * q) / q)


class BasisGraph:
    """One connected family of detectors plus a boundary node."""

    def __init__(self, index: int, detectors: Sequence[int]):
        self.index = index
        self.detectors = list(detectors)
        self.local = {d: k for k, d in enumerate(self.detectors)}
        self.boundary = len(self.detectors)
        self.slot_ends: List[Tuple[int, int]] = []
        self.slot_of: Dict[Tuple[int, int], int] = {}
        # per slot: edges acting on this slot alone, and (edge, component) parts of split hyperedges
        self.standalone: List[List[int]] = []
        self.parts: List[List[Tuple[int, int]]] = []

    @property
    def num_nodes(self) -> int:
        return len(self.detectors) + 1

    @property
    def num_slots(self) -> int:
        return len(self.slot_ends)

    def _slot(self, dets: Tuple[int, ...]) -> int:
        if len(dets) == 1:
            key = (self.local[dets[0]], self.boundary)
        else:
            a, b = self.local[dets[0]], self.local[dets[1]]
            key = (a, b) if a < b else (b, a)
        s = self.slot_of.get(key)
        if s is None:
            s = len(self.slot_ends)
            self.slot_of[key] = s
            self.slot_ends.append(key)
            self.standalone.append([])
            self.parts.append([])
        return s

    def finalize(self) -> None:
        rows, cols = [], []
        for u, v in self.slot_ends:
            rows += [u, v]
            cols += [v, u]
        n = self.num_nodes
        m = csr_matrix((np.arange(1, len(rows) + 1, dtype=np.float64), (rows, cols)), shape=(n, n))
        m.sort_indices()
        order = m.data.astype(np.int64) - 1
        # position in csr data of every (slot, direction) entry
        self.csr_indices = m.indices
        self.csr_indptr = m.indptr
        self.csr_slot = order // 2

    def finalize_parity(self, slot_obs: Sequence[int]) -> None:
        """Doubled graph over (node, observable parity); node ``v + n * parity``."""
        self.slot_obs = [o & 1 for o in slot_obs]
        self.carries_observable = any(self.slot_obs)
        n = self.num_nodes
        rows, cols, labels = [], [], []
        for s, (u, v) in enumerate(self.slot_ends):
            o = self.slot_obs[s]
            for par in (0, 1):
                rows += [u + n * par, v + n * par]
                cols += [v + n * (par ^ o), u + n * (par ^ o)]
                labels += [s, s]
        m = csr_matrix((np.arange(1, len(rows) + 1, dtype=np.float64), (rows, cols)), shape=(2 * n, 2 * n))
        m.sort_indices()
        order = m.data.astype(np.int64) - 1
        self.csr2_indices = m.indices
        self.csr2_indptr = m.indptr
        self.csr2_slot = np.asarray(labels, dtype=np.int64)[order]


@dataclass
class DecomposedGraph:
    """Graphlike split of a model with per-slot probabilities and weights."""

    model: ErrorModel
    bases: List[BasisGraph]
    basis_of: Dict[int, int]
    # per edge: list of (basis, slot) for its components with detectors
    edge_slots: List[List[Tuple[int, int]]]
    slot_prob: List[np.ndarray] = field(default_factory=list)
    slot_weight: List[np.ndarray] = field(default_factory=list)
    _sp_cache: Dict[Tuple[int, bool], Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.slot_prob:
            self._compute_probabilities()
        self._sp_cache = {}
        # per-basis CSR data arrays under the base weights
        self._csr: List[Optional[np.ndarray]] = [None] * len(self.bases)
        self._csr2: List[Optional[np.ndarray]] = [None] * len(self.bases)

    def _compute_probabilities(self) -> None:
        probs = self.model.probabilities
        self.slot_prob, self.slot_weight = [], []
        for b in self.bases:
            contrib: List[List[float]] = [[] for _ in range(b.num_slots)]
            for s in range(b.num_slots):
                for e in b.standalone[s]:
                    contrib[s].append(probs[e])
                for e, _ in b.parts[s]:
                    contrib[s].append(probs[e])
            q = np.array([_xor_prob(c) for c in contrib], dtype=np.float64)
            self.slot_prob.append(q)
            self.slot_weight.append(np.array([_slot_weight(x) for x in q], dtype=np.float64))

    def for_model(self, model: ErrorModel) -> "DecomposedGraph":
        """Same structure, probabilities taken from ``model`` (same edge list shape)."""
        if len(model.edges) != len(self.model.edges):
            raise DecompositionError("model does not share this graph's edge structure")
        return DecomposedGraph(model, self.bases, self.basis_of, self.edge_slots)

    def standalone_weight(self, basis: int, slot: int) -> Tuple[float, Optional[int]]:
        best, arg = _INF, None
        w = self.model._weight_list
        for e in self.bases[basis].standalone[slot]:
            if w[e] < best:
                best, arg = w[e], e
        return best, arg

    def _arrays(self, basis: int, weights: Optional[np.ndarray], doubled: bool):
        """CSR ``(indptr, indices, data)`` of a basis graph (or its parity double)."""
        b = self.bases[basis]
        if doubled:
            label, indices, indptr = b.csr2_slot, b.csr2_indices, b.csr2_indptr
        else:
            label, indices, indptr = b.csr_slot, b.csr_indices, b.csr_indptr
        if weights is not None:
            return indptr, indices, weights[label]
        cache = self._csr2 if doubled else self._csr
        if cache[basis] is None:
            cache[basis] = self.slot_weight[basis][label]
        return indptr, indices, cache[basis]

    def boundary_distances(self, basis: int, weights: Optional[np.ndarray] = None, doubled: bool = False):
        """Distance and predecessor rows from the boundary node (cached for base weights)."""
        key = (basis, doubled)
        if weights is None and key in self._sp_cache:
            return self._sp_cache[key]
        indptr, indices, data = self._arrays(basis, weights, doubled)
        src = np.array([self.bases[basis].boundary], dtype=np.int64)
        dist, pred = bounded_dijkstra(indptr, indices, data, src, np.inf, -1, 1)
        out = (dist[0], pred[0])
        if weights is None:
            self._sp_cache[key] = out
        return out

    def _bounded(self, basis: int, sources: Sequence[int], weights: Optional[np.ndarray], limit: float,
                 doubled: bool):
        # paths through the boundary are never better than two boundary matches
        b = self.bases[basis]
        indptr, indices, data = self._arrays(basis, weights, doubled)
        src = np.asarray(sources, dtype=np.int64)
        return bounded_dijkstra(indptr, indices, data, src, float(limit), b.boundary, b.num_nodes)

    def shortest_paths(self, basis: int, sources: Sequence[int], weights: Optional[np.ndarray] = None,
                       limit: float = np.inf):
        """Distance and predecessor rows for ``sources`` (local node ids), searched up to ``limit``."""
        return self._bounded(basis, sources, weights, limit, False)

    def parity_shortest_paths(self, basis: int, sources: Sequence[int], weights: Optional[np.ndarray] = None,
                              limit: float = np.inf):
        """Like ``shortest_paths`` on the doubled graph, from parity-0 copies of ``sources``."""
        return self._bounded(basis, sources, weights, limit, True)


def decompose(model: ErrorModel) -> DecomposedGraph:
    parent = list(range(model.num_detectors))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps_per_edge = []
    for i, e in enumerate(model.edges):
        comps = [(c, o) for c, o in e.components() if c]
        if len(comps) == 1 and e.decomposition is None and e.degree > 2:
            raise DecompositionError(
                f"edge {i} touches {e.degree} detectors {e.detectors} and has no decomposition hint"
            )
        comps_per_edge.append(comps)
        for c, _ in comps:
            if len(c) == 2:
                ra, rb = find(c[0]), find(c[1])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    groups: Dict[int, List[int]] = {}
    for d in range(model.num_detectors):
        groups.setdefault(find(d), []).append(d)
    bases = [BasisGraph(k, dets) for k, dets in enumerate(groups[r] for r in sorted(groups))]
    basis_of = {d: b.index for b in bases for d in b.detectors}

    edge_slots: List[List[Tuple[int, int]]] = []
    for i, comps in enumerate(comps_per_edge):
        slots = []
        for c, _ in comps:
            bi = basis_of[c[0]]
            slots.append((bi, bases[bi]._slot(c)))
        edge_slots.append(slots)
        if len(slots) == 1:
            bi, s = slots[0]
            bases[bi].standalone[s].append(i)
        else:
            for k, (bi, s) in enumerate(slots):
                bases[bi].parts[s].append((i, k))
    probs = model.probabilities
    for b in bases:
        b.finalize()
        slot_obs = []
        for s in range(b.num_slots):
            # observable of the most probable contributor
            contrib = [(probs[e], -e, model.edges[e].observables) for e in b.standalone[s]]
            contrib += [(probs[e], -e, comps_per_edge[e][k][1]) for e, k in b.parts[s]]
            slot_obs.append(max(contrib)[2])
        b.finalize_parity(slot_obs)
    return DecomposedGraph(model, bases, basis_of, edge_slots)


# --------------------------------------------------------------------------- defect pairing

def _useful(pair: float, via_boundary: float) -> bool:
    return math.isfinite(pair) and (pair < via_boundary or not math.isfinite(via_boundary))


def _pair_exact(pair_cost: np.ndarray, bnd_cost: np.ndarray, nodes: List[int]):
    k = len(nodes)
    if k == 0:
        return 0.0, []
    pc = pair_cost.tolist()
    bc = bnd_cost.tolist()
    full = (1 << k) - 1
    # a pair no cheaper than two boundary matches never needs to be used
    nbr = [sum(1 << j for j in range(k) if j != i and _useful(pc[i][j], bc[i] + bc[j])) for i in range(k)]

    @lru_cache(maxsize=None)
    def best(mask: int) -> Tuple[float, int]:
        # returns (cost, choice): choice = j for pair (i, j), -1 for boundary
        if mask == 0:
            return 0.0, -2
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        top, choice = bc[i] + best(rest)[0], -1
        row = pc[i]
        m = rest & nbr[i]
        while m:
            low = m & -m
            j = low.bit_length() - 1
            m ^= low
            c = row[j]
            if c < top:
                c += best(rest ^ low)[0]
                if c < top:
                    top, choice = c, j
        return top, choice

    total = best(full)[0]
    out = []
    mask = full
    while mask:
        i = (mask & -mask).bit_length() - 1
        _, j = best(mask)
        if j == -1:
            out.append((nodes[i], None))
            mask ^= 1 << i
        else:
            out.append((nodes[i], nodes[j]))
            mask ^= (1 << i) | (1 << j)
    best.cache_clear()
    return total, out


def _groupings(items):
    """Every way to split ``items`` into pairs and boundary singles."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for tail in _groupings(rest):
        yield [(first, None)] + tail
    for k, other in enumerate(rest):
        for tail in _groupings(rest[:k] + rest[k + 1:]):
            yield [(first, other)] + tail


def _pair_heuristic(pair_cost: np.ndarray, bnd_cost: np.ndarray, nodes: List[int]):
    """Greedy cheapest-first pairing followed by 2-swap local improvement."""
    k = len(nodes)
    mate: List[Optional[int]] = [None] * k
    done = [False] * k
    cand = sorted([(pair_cost[i, j], i, j) for i in range(k) for j in range(i + 1, k)]
                  + [(bnd_cost[i], i, -1) for i in range(k)])
    for _, i, j in cand:
        if done[i] or (j >= 0 and done[j]):
            continue
        done[i] = True
        if j >= 0:
            done[j] = True
            mate[i], mate[j] = j, i

    def cost(i, j):
        return bnd_cost[i] if j is None else pair_cost[i, j]

    def units():
        return [(i, mate[i]) for i in range(k) if mate[i] is None or i < mate[i]]

    improved = True
    while improved:
        improved = False
        us = units()
        for x in range(len(us)):
            for y in range(x + 1, len(us)):
                old = cost(*us[x]) + cost(*us[y])
                ends = [v for u in (us[x], us[y]) for v in u if v is not None]
                for grouping in _groupings(ends):
                    if sum(cost(*u) for u in grouping) < old - 1e-12:
                        for i, j in grouping:
                            mate[i] = j
                            if j is not None:
                                mate[j] = i
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
    out = [(nodes[i], None if j is None else nodes[j]) for i, j in units()]
    return sum(cost(i, j) for i, j in units()), out


def pair_defects(pair_cost: np.ndarray, bnd_cost: np.ndarray) -> Tuple[float, list, bool]:
    """Minimum-cost pairing of defects, each either paired or sent to the boundary.

    Defects are first split into clusters: a pair whose direct cost is no
    smaller than sending both to the boundary can be replaced without loss,
    so only cheaper pairs link clusters and each cluster is solved alone.
    Returns ``(total, [(i, j or None), ...], exact)``.
    """
    k = len(bnd_cost)
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    via = bnd_cost[:, None] + bnd_cost[None, :]
    with np.errstate(invalid="ignore"):
        link = np.isfinite(pair_cost) & ((pair_cost < via) | ~np.isfinite(via))
    for i, j in zip(*np.nonzero(np.triu(link, 1))):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[rj] = ri
    clusters: Dict[int, List[int]] = {}
    for i in range(k):
        clusters.setdefault(find(i), []).append(i)
    total, out, exact = 0.0, [], True
    for nodes in clusters.values():
        if len(nodes) == 1:
            total += bnd_cost[nodes[0]]
            out.append((nodes[0], None))
            continue
        if len(nodes) == 2:
            # linked, so the direct pair is strictly cheaper
            total += pair_cost[nodes[0], nodes[1]]
            out.append((nodes[0], nodes[1]))
            continue
        sub_p = pair_cost[np.ix_(nodes, nodes)]
        sub_b = bnd_cost[nodes]
        if len(nodes) <= EXACT_DEFECT_LIMIT:
            t, o = _pair_exact(sub_p, sub_b, nodes)
        else:
            t, o = _pair_heuristic(sub_p, sub_b, nodes)
            exact = False
        total += t
        out += o
    if not math.isfinite(total):
        raise InfeasibleSyndromeError("some defect cannot be matched to another defect or the boundary")
    return total, out, exact


def _pair_parity_exact(dp, db, nodes: List[int]):
    """Per-parity optimum of one defect cluster.

    ``dp[i][j][q]`` / ``db[i][q]``: cost of joining i to j (or the boundary)
    with observable parity q.  Returns ``[(cost, units) for parity 0, 1]``
    where units are ``(i, j or None, q)``.
    """
    k = len(nodes)
    nbr = [
        sum(1 << j for j in range(k) if j != i and any(
            _useful(dp[i][j][q], min(db[i][0] + db[j][q], db[i][1] + db[j][1 ^ q])) for q in (0, 1)))
        for i in range(k)
    ]

    @lru_cache(maxsize=None)
    def best(mask: int):
        if mask == 0:
            return ((0.0, None), (_INF, None))
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        out = [(_INF, None), (_INF, None)]
        sub = best(rest)
        for q in (0, 1):
            for par in (0, 1):
                c = db[i][q] + sub[par ^ q][0]
                if c < out[par][0]:
                    out[par] = (c, (-1, q))
        m = rest
        while m:
            low = m & -m
            j = low.bit_length() - 1
            m ^= low
            sub = best(rest ^ low)
            for q in (0, 1):
                base = dp[i][j][q]
                for par in (0, 1):
                    c = base + sub[par ^ q][0]
                    if c < out[par][0]:
                        out[par] = (c, (j, q))
        return tuple(out)

    full = (1 << k) - 1
    result = []
    for target in (0, 1):
        cost = best(full)[target][0]
        units = []
        mask, par = full, target
        while mask and math.isfinite(cost):
            i = (mask & -mask).bit_length() - 1
            j, q = best(mask)[par][1]
            if j == -1:
                units.append((nodes[i], None, q))
                mask ^= 1 << i
            else:
                units.append((nodes[i], nodes[j], q))
                mask ^= (1 << i) | (1 << j)
            par ^= q
        result.append((cost, units))
    best.cache_clear()
    return result


def pair_defects_parity(dp: np.ndarray, db: np.ndarray, loop: float, parity: int):
    """Minimum-cost pairing whose joined paths have total observable parity ``parity``.

    ``dp`` has shape (k, k, 2), ``db`` shape (k, 2); ``loop`` is the cost of a
    boundary-to-boundary path with parity 1.  Returns ``(cost, units, use_loop)``
    or ``None`` when some cluster is too large to solve exactly.
    """
    k = len(db)
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(k):
        for j in range(i + 1, k):
            for q in (0, 1):
                via_boundary = min(db[i, 0] + db[j, q], db[i, 1] + db[j, 1 ^ q])
                if math.isfinite(dp[i, j, q]) and not dp[i, j, q] >= via_boundary:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[rj] = ri
    clusters: Dict[int, List[int]] = {}
    for i in range(k):
        clusters.setdefault(find(i), []).append(i)
    # running (cost, units) per total parity
    acc = [(0.0, []), (_INF, [])]
    for nodes in clusters.values():
        if len(nodes) > EXACT_DEFECT_LIMIT:
            return None
        sub_dp = dp[np.ix_(nodes, nodes)].tolist()
        sub_db = db[nodes].tolist()
        res = _pair_parity_exact(sub_dp, sub_db, nodes)
        new = [(_INF, []), (_INF, [])]
        for a in (0, 1):
            for b in (0, 1):
                c = acc[a][0] + res[b][0]
                if c < new[a ^ b][0]:
                    new[a ^ b] = (c, acc[a][1] + res[b][1])
        acc = new
    direct = acc[parity]
    looped = (acc[parity ^ 1][0] + loop, acc[parity ^ 1][1])
    if looped[0] < direct[0]:
        return looped[0], looped[1], True
    if not math.isfinite(direct[0]):
        return None
    return direct[0], direct[1], False


# --------------------------------------------------------------------------- per-basis matching

@dataclass
class EdgeMatching:
    slots: frozenset
    weight: float
    exact: bool


def _search_limit(costs: np.ndarray) -> float:
    """Sum of the two largest costs: no useful pair path is longer."""
    if len(costs) == 0 or not np.all(np.isfinite(costs)):
        return np.inf
    top = np.sort(costs)[-2:]
    return float(top.sum()) if len(top) == 2 else float(top[0])


def _walk(b: BasisGraph, pred_row: np.ndarray, start: int, target: int, matched: set, modulus: int) -> None:
    node = target
    while node != start:
        prev = int(pred_row[node])
        if prev < 0:
            raise InfeasibleSyndromeError("no path between matched nodes")
        u, v = prev % modulus, node % modulus
        key = (u, v) if u < v else (v, u)
        matched ^= {b.slot_of[key]}
        node = prev


def match_edges(graph: DecomposedGraph, basis: int, defects: Sequence[int],
                weights: Optional[np.ndarray] = None) -> EdgeMatching:
    """Minimum-weight set of slots of one basis whose boundary is ``defects``.

    ``defects`` are global detector ids belonging to the basis.
    """
    if not defects:
        return EdgeMatching(frozenset(), 0.0, True)
    b = graph.bases[basis]
    n = b.num_nodes
    src = [b.local[d] for d in defects]
    bdist, bpred = graph.boundary_distances(basis, weights)
    bnd_cost = bdist[src]
    dist, pred = graph.shortest_paths(basis, src, weights, _search_limit(bnd_cost))
    total, pairs, exact = pair_defects(dist[:, src], bnd_cost)
    matched: set = set()
    for i, j in pairs:
        if j is None:
            _walk(b, bpred, b.boundary, src[i], matched, n)
        else:
            _walk(b, pred[i], src[i], src[j], matched, n)
    return EdgeMatching(frozenset(matched), float(total), exact)


def match_edges_parity(graph: DecomposedGraph, basis: int, defects: Sequence[int], parity: int,
                       weights: Optional[np.ndarray] = None) -> Optional[EdgeMatching]:
    """Minimum-weight slot set for ``defects`` whose observable parity is ``parity``.

    Returns ``None`` if no such set exists or a cluster is too large.
    """
    b = graph.bases[basis]
    n = b.num_nodes
    src = [b.local[d] for d in defects]
    k = len(src)
    bdist, bpred = graph.boundary_distances(basis, weights, doubled=True)
    cols = np.array(src, dtype=np.int64)
    db = np.stack([bdist[cols], bdist[cols + n]], axis=-1) if k else np.zeros((0, 2))
    loop = float(bdist[b.boundary + n])
    if k:
        dist, pred = graph.parity_shortest_paths(basis, src, weights, _search_limit(db.max(axis=1)))
        dp = np.stack([dist[:, cols], dist[:, cols + n]], axis=-1)
    else:
        pred, dp = None, np.zeros((0, 0, 2))
    solved = pair_defects_parity(dp, db, loop, parity)
    if solved is None:
        return None
    total, units, use_loop = solved
    matched: set = set()
    for i, j, q in units:
        if j is None:
            _walk(b, bpred, b.boundary, src[i] + n * q, matched, n)
        else:
            _walk(b, pred[i], src[i], src[j] + n * q, matched, n)
    if use_loop:
        _walk(b, bpred, b.boundary, b.boundary + n, matched, n)
    return EdgeMatching(frozenset(matched), float(total), True)


# --------------------------------------------------------------------------- correlated decode

@dataclass(frozen=True)
class MatcherResult:
    config: frozenset
    weight: float
    exact: bool = True


class CorrelatedMatcher:
    """Two-pass correlated matcher bound to one model."""

    def __init__(self, model: ErrorModel, graph: Optional[DecomposedGraph] = None):
        self.model = model
        self.graph = graph if graph is not None else decompose(model)
        g = self.graph
        self._multi_edges = [i for i, s in enumerate(g.edge_slots) if len(s) > 1]
        probs = model.probabilities
        # posterior that a split hyperedge fired given one of its slots fired
        self._posterior: Dict[Tuple[int, int], float] = {}
        for i in self._multi_edges:
            for k, (bi, s) in enumerate(g.edge_slots[i]):
                alone = sum(probs[e] for e in g.bases[bi].standalone[s])
                self._posterior[(i, k)] = probs[i] / (probs[i] + alone)
        self._cand_cache: Dict[Tuple[int, int], tuple] = {}
        self._realised: Dict[frozenset, object] = {}

    def split_syndrome(self, syndrome) -> Dict[int, List[int]]:
        per: Dict[int, List[int]] = {}
        basis_of = self.graph.basis_of
        for d in sorted(syndrome):
            bi = basis_of.get(d)
            if bi is None:
                raise InfeasibleSyndromeError(f"detector {d} is outside the model")
            per.setdefault(bi, []).append(d)
        return per

    def _solve(self, syndrome):
        """Per-basis defects, final slot matchings and the weights they used."""
        g = self.graph
        per = self.split_syndrome(syndrome)
        first = {bi: match_edges(g, bi, dets) for bi, dets in per.items()}
        # reweight each basis from the other bases' first-pass slots
        updates: Dict[int, Dict[int, float]] = {}
        for bi, em in first.items():
            parts = g.bases[bi].parts
            for s in em.slots:
                for e, k in parts[s]:
                    pi = self._posterior[(e, k)]
                    for k2, (bj, s2) in enumerate(g.edge_slots[e]):
                        if k2 == k or bj == bi:
                            continue
                        q = updates.setdefault(bj, {}).get(s2, g.slot_prob[bj][s2])
                        updates[bj][s2] = min(pi + (1.0 - pi) * q, _P_MAX)
        final = dict(first)
        weights: Dict[int, np.ndarray] = {}
        for bj, upd in updates.items():
            w = g.slot_weight[bj].copy()
            for s2, q in upd.items():
                w[s2] = _slot_weight(q)
            weights[bj] = w
            if bj in per:
                final[bj] = match_edges(g, bj, per[bj], w)
        return per, final, weights

    def _realise(self, matched: set, syndrome) -> frozenset:
        config = self.assign(matched)
        if self.model.syndrome_mask(config) != mask_of(syndrome):
            raise DecompositionError("matched slots could not be realised by hyperedges of the model")
        return config

    def decode(self, syndrome) -> MatcherResult:
        if not syndrome:
            return MatcherResult(frozenset(), 0.0, True)
        per, final, _ = self._solve(syndrome)
        config = self._realise({(bi, s) for bi, em in final.items() for s in em.slots}, syndrome)
        return MatcherResult(config, config_weight(config, self.model),
                             all(em.exact for em in final.values()))

    def decode_pair(self, syndrome) -> Tuple[MatcherResult, Optional[MatcherResult]]:
        """Correlated matching plus the best matching found with observable bit 0 flipped.

        The complement re-solves one observable-carrying basis under a parity
        constraint, keeping the other bases' slots; ``None`` if impossible.
        """
        g = self.graph
        per, final, weights = self._solve(syndrome)
        slots = {(bi, s) for bi, em in final.items() for s in em.slots}
        config = self._realise(slots, syndrome) if syndrome else frozenset()
        result = MatcherResult(config, config_weight(config, self.model),
                               all(em.exact for em in final.values()))
        obs = observable_of(config, self.model) & 1
        best: Optional[MatcherResult] = None
        for bi, b in enumerate(g.bases):
            if not b.carries_observable:
                continue
            cur = final.get(bi)
            cur_slots = cur.slots if cur is not None else frozenset()
            par = 0
            for s in cur_slots:
                par ^= b.slot_obs[s]
            em = match_edges_parity(g, bi, per.get(bi, []), par ^ 1, weights.get(bi))
            if em is None:
                continue
            other = {x for x in slots if x[0] != bi} | {(bi, s) for s in em.slots}
            try:
                cfg = self._realise(other, syndrome)
            except DecompositionError:
                continue
            if observable_of(cfg, self.model) & 1 == obs:
                continue
            w = config_weight(cfg, self.model)
            if best is None or w < best.weight:
                best = MatcherResult(cfg, w, True)
        return result, best

    def assign(self, matched: set) -> frozenset:
        """Turn matched slots into the lightest hyperedge set whose slots XOR to them.

        Candidate hyperedges (those on a matched slot, plus standalone
        mechanisms of their partner slots) are grouped by shared slots; small
        groups are solved exactly by enumerating the GF(2) solution coset, the
        rest fall back to the greedy whole-hyperedge rule.
        """
        chosen: set = set()
        leftover: set = set()
        for target in self._realisation_groups(matched):
            best = self._realised.get(target)
            if best is None:
                edges = sorted({e for x in target for e in self._slot_candidates(x)[0]})
                best = self._realise_exact(edges, target)
                if len(self._realised) < 1 << 16:
                    self._realised[target] = best
            if best is False:
                leftover |= target
            else:
                chosen ^= best
        if leftover:
            chosen ^= self._assign_greedy(leftover)
        return frozenset(chosen)

    def _slot_candidates(self, x: Tuple[int, int]):
        """Hyperedges that may realise slot ``x`` and every slot they touch."""
        got = self._cand_cache.get(x)
        if got is None:
            g = self.graph
            b = g.bases[x[0]]
            if not b.standalone[x[1]] and not b.parts[x[1]]:
                raise DecompositionError(f"slot {b.slot_ends[x[1]]} has no mechanism")
            cands = set(b.standalone[x[1]])
            cands.update(e for e, _ in b.parts[x[1]])
            for e in list(cands):
                if len(g.edge_slots[e]) > 1:
                    for bi, s in g.edge_slots[e]:
                        cands.update(g.bases[bi].standalone[s])
            touched = frozenset(y for e in cands for y in g.edge_slots[e])
            got = (tuple(sorted(cands)), touched)
            self._cand_cache[x] = got
        return got

    def _realisation_groups(self, matched: set) -> List[frozenset]:
        """Matched slots split into groups whose candidate hyperedges share no slot."""
        order = sorted(matched)
        parent = list(range(len(order)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        owner: Dict[Tuple[int, int], int] = {}
        for k, x in enumerate(order):
            for y in self._slot_candidates(x)[1]:
                o = owner.setdefault(y, k)
                ra, rb = find(o), find(k)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: Dict[int, List[Tuple[int, int]]] = {}
        for k, x in enumerate(order):
            groups.setdefault(find(k), []).append(x)
        return [frozenset(groups[r]) for r in sorted(groups)]

    def _realise_exact(self, edges: List[int], target: frozenset):
        """Minimum-weight realisation as a frozenset, or ``False`` when not solvable here."""
        g = self.graph
        w = self.model._weight_list
        index: Dict[Tuple[int, int], int] = {}
        cols = []
        for e in edges:
            mask = 0
            for x in g.edge_slots[e]:
                mask ^= 1 << index.setdefault(x, len(index))
            cols.append(mask)
        goal = 0
        for x in target:
            goal ^= 1 << index[x]
        try:
            x0, kernel = gf2_solve(cols, goal)
        except InfeasibleSyndromeError:
            return False
        if len(kernel) > REALISE_KERNEL_LIMIT:
            return False
        best = None
        for bits in range(1 << len(kernel)):
            sol = x0
            for k, vec in enumerate(kernel):
                if bits >> k & 1:
                    sol ^= vec
            picked = tuple(edges[i] for i in bits_of(sol))
            key = (math.fsum(w[e] for e in picked), tuple(sorted(picked)))
            if best is None or key < best:
                best = key
        return frozenset(best[1])

    def _assign_greedy(self, matched: set) -> set:
        """Whole hyperedges when no heavier than their standalone parts, then standalone mechanisms."""
        g = self.graph
        w = self.model._weight_list
        remaining = set(matched)
        chosen: set = set()
        cands = set()
        for bi, s in remaining:
            for e, _ in g.bases[bi].parts[s]:
                cands.add(e)
        for e in sorted(cands, key=lambda e: (w[e], e)):
            slots = g.edge_slots[e]
            if not all(x in remaining for x in slots):
                continue
            alone = sum(g.standalone_weight(bi, s)[0] for bi, s in slots)
            if w[e] <= alone:
                chosen ^= {e}
                remaining.difference_update(slots)
        budget = 4 * (len(remaining) + 8)
        while remaining:
            budget -= 1
            if budget < 0:
                return chosen ^ set(self._assign_linear(remaining))
            bi, s = min(remaining)
            _, e = g.standalone_weight(bi, s)
            if e is not None:
                chosen ^= {e}
                remaining.discard((bi, s))
                continue
            parts = g.bases[bi].parts[s]
            if not parts:
                raise DecompositionError(f"slot {g.bases[bi].slot_ends[s]} has no mechanism")
            e = min((p[0] for p in parts), key=lambda x: (w[x], x))
            chosen ^= {e}
            for x in g.edge_slots[e]:
                remaining ^= {x}
        return chosen


    def _assign_linear(self, slots: set) -> frozenset:
        """Any hyperedge set whose slots XOR to ``slots`` (GF(2) solve)."""
        g = self.graph
        index: Dict[Tuple[int, int], int] = {}
        cols = []
        for e, es in enumerate(g.edge_slots):
            mask = 0
            for x in es:
                mask ^= 1 << index.setdefault(x, len(index))
            cols.append(mask)
        target = 0
        for x in slots:
            if x not in index:
                raise DecompositionError(f"slot {x} has no mechanism")
            target ^= 1 << index[x]
        try:
            sol, _ = gf2_solve(cols, target)
        except InfeasibleSyndromeError as exc:
            raise DecompositionError("matched slots cannot be realised by hyperedges of the model") from exc
        return frozenset(bits_of(sol))


_matchers: "WeakKeyDictionary[ErrorModel, CorrelatedMatcher]" = WeakKeyDictionary()


def matcher_for(model: ErrorModel) -> CorrelatedMatcher:
    m = _matchers.get(model)
    if m is None:
        m = CorrelatedMatcher(model)
        _matchers[model] = m
    return m


def correlated_decode(model: ErrorModel, syndrome) -> MatcherResult:
    return matcher_for(model).decode(syndrome)
