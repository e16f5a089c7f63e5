"""Matching synthesis.

Two matchings for the same syndrome differ by a null-syndrome set.  Splitting
that difference into connected pieces and flipping only the pieces that lower
the weight gives a matching at least as good as either input.  Pieces with a
nonzero observable mask are logical operators; two of them with equal masks
combine into a cycle.  Non-improving cycles are kept in a small store and later
summed into a per-class degeneracy factor.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .hypergraph import ErrorModel, LibraError, observable_of

CYCLE = "cycle"
LOGICAL = "logical"

# components with at least this many cycles are summed to second order only
TRUNCATION_SIZE = 10


class ContractViolation(LibraError, ValueError):
    pass


@dataclass(frozen=True)
class Piece:
    edges: frozenset
    observables: int
    relative_weight: float

    @property
    def kind(self) -> str:
        return CYCLE if self.observables == 0 else LOGICAL

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(sorted(self.edges))


def relative_weight(piece: Iterable[int], base: frozenset, model: ErrorModel) -> float:
    """Weight change from XOR-ing ``piece`` into ``base``; cost is linear in ``|piece|``."""
    w = model._weight_list
    return math.fsum(-w[i] if i in base else w[i] for i in piece)


def split_null_components(diff: frozenset, model: ErrorModel, base: frozenset = frozenset()) -> List[Piece]:
    """Connected components of ``diff``, two edges being adjacent when they share a detector."""
    if model.syndrome_mask(diff) != 0:
        raise ContractViolation("difference has a nonempty syndrome")
    if not diff:
        return []
    edges = sorted(diff)
    parent = {e: e for e in edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: Dict[int, int] = {}
    for e in edges:
        for d in model.edges[e].detectors:
            o = owner.get(d)
            if o is None:
                owner[d] = e
            else:
                ra, rb = find(o), find(e)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: Dict[int, List[int]] = {}
    for e in edges:
        groups.setdefault(find(e), []).append(e)
    pieces = []
    for root in sorted(groups):
        members = frozenset(groups[root])
        pieces.append(Piece(members, observable_of(members, model), relative_weight(members, base, model)))
    return pieces


def pair_logicals(logical_pieces: List[Piece], base: frozenset, model: ErrorModel) -> List[Piece]:
    """Cycles made from pairs of logical pieces with equal observable masks."""
    out, seen = [], set()
    for i in range(len(logical_pieces)):
        for j in range(i + 1, len(logical_pieces)):
            a, b = logical_pieces[i], logical_pieces[j]
            if a.observables != b.observables:
                continue
            c = a.edges ^ b.edges
            if not c:
                continue
            key = tuple(sorted(c))
            if key in seen:
                continue
            seen.add(key)
            out.append(Piece(c, 0, relative_weight(c, base, model)))
    return out


class PositiveCycleStore:
    """Fixed-capacity max-heap of the smallest nonnegative-relative-weight cycles.

    Entries are only meaningful relative to ``base``; rebinding to a different
    base empties the store.
    """

    def __init__(self, capacity: int = 30, base: Optional[frozenset] = None):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.capacity = capacity
        self.base = base
        self._heap: List[Tuple[float, Tuple[int, ...], frozenset]] = []
        self._keys: set = set()

    def __len__(self) -> int:
        return len(self._heap)

    def reset(self, base: Optional[frozenset]) -> None:
        self.base = base
        self._heap.clear()
        self._keys.clear()

    def bind(self, base: frozenset) -> None:
        if self.base != base:
            self.reset(base)

    def offer(self, cycle: frozenset, rel: float) -> bool:
        if rel < 0:
            raise ContractViolation("only nonnegative cycles may be stored")
        if self.capacity == 0 or not cycle:
            return False
        key = tuple(sorted(cycle))
        if key in self._keys:
            return False
        item = (-rel, key, frozenset(cycle))
        if len(self._heap) < self.capacity:
            heapq.heappush(self._heap, item)
        elif rel < -self._heap[0][0]:
            old = heapq.heapreplace(self._heap, item)
            self._keys.discard(old[1])
        else:
            return False
        self._keys.add(key)
        return True

    def entries(self) -> List[Tuple[float, frozenset]]:
        """(relative weight, cycle) pairs in ascending weight order."""
        return [(-nr, c) for nr, _, c in sorted(self._heap, key=lambda t: (-t[0], t[1]))]

    def max_weight(self) -> float:
        return -self._heap[0][0] if self._heap else 0.0


@dataclass
class SynthesisResult:
    config: frozenset
    logicals: List[Piece] = field(default_factory=list)
    applied: List[Piece] = field(default_factory=list)
    stored: int = 0


def synthesize(base: frozenset, other: frozenset, model: ErrorModel,
               store: Optional[PositiveCycleStore] = None) -> SynthesisResult:
    """Improve ``base`` with the improving cycles found in ``base ^ other``.

    Candidates are the cycle pieces of the difference plus pairs of logical
    pieces with equal masks.  They are tried in ascending relative weight,
    each re-evaluated against the current matching, and the sweep repeats
    until nothing improves.  Remaining nonnegative cycles go to ``store``.
    """
    base = frozenset(base)
    other = frozenset(other)
    if model.syndrome_mask(base) != model.syndrome_mask(other):
        raise ContractViolation("matchings have different syndromes")
    if store is not None:
        store.bind(base)
    diff = base ^ other
    if not diff:
        return SynthesisResult(base)
    pieces = split_null_components(diff, model, base)
    logicals = [p for p in pieces if p.kind == LOGICAL]
    cands = [p for p in pieces if p.kind == CYCLE] + pair_logicals(logicals, base, model)
    cands.sort(key=lambda p: (p.relative_weight, p.key))

    current = base
    applied: List[Piece] = []
    changed = True
    while changed:
        changed = False
        for p in cands:
            rel = relative_weight(p.edges, current, model)
            if rel < 0:
                current = current ^ p.edges
                applied.append(Piece(p.edges, 0, rel))
                changed = True

    stored = 0
    if store is not None:
        if applied:
            store.reset(current)
        for p in cands:
            rel = relative_weight(p.edges, current, model)
            if rel >= 0 and store.offer(p.edges, rel):
                stored += 1
    logicals = [Piece(p.edges, p.observables, relative_weight(p.edges, current, model)) for p in logicals]
    return SynthesisResult(current, logicals, applied, stored)


def _components_by_overlap(cycles: List[frozenset]) -> List[List[int]]:
    parent = list(range(len(cycles)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: Dict[int, int] = {}
    for k, c in enumerate(cycles):
        for e in c:
            o = owner.setdefault(e, k)
            if o != k:
                ra, rb = find(o), find(k)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: Dict[int, List[int]] = {}
    for k in range(len(cycles)):
        groups.setdefault(find(k), []).append(k)
    return [groups[r] for r in sorted(groups)]


def generated_cycles(cycles: List[frozenset], truncate: bool = False) -> set:
    """Distinct XOR combinations of ``cycles`` (null cycle included).

    With ``truncate`` only combinations of at most two generators are formed.
    """
    seen = {frozenset()}
    if truncate:
        for i, a in enumerate(cycles):
            seen.add(a)
            for b in cycles[i + 1:]:
                seen.add(a ^ b)
        return seen
    for c in cycles:
        seen |= {g ^ c for g in seen}
    return seen


def degeneracy_factor(store: PositiveCycleStore, model: ErrorModel) -> float:
    """Relative probability of the stored base's class versus the base alone.

    Product over overlap-connected groups of stored cycles of the summed
    ``exp(-relative weight)`` of every distinct cycle the group generates.
    """
    if not len(store):
        return 1.0
    base = store.base
    cycles = [c for _, c in store.entries()]
    total = 1.0
    for comp in _components_by_overlap(cycles):
        gens = [cycles[k] for k in comp]
        generated = generated_cycles(gens, truncate=len(gens) >= TRUNCATION_SIZE)
        total *= math.fsum(math.exp(-relative_weight(g, base, model)) for g in generated)
    return total
