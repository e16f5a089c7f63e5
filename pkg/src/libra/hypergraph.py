"""Weighted error hypergraph and the XOR algebra of error configurations.

Detectors and hyperedges are referred to by integer index.  An error
configuration is a ``frozenset`` of hyperedge indices, a syndrome is a
``frozenset`` of detector indices; both compose with ``^``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

ErrorConfig = frozenset
Syndrome = frozenset

# (detectors, observable mask) of one graphlike piece of a hyperedge
Component = Tuple[Tuple[int, ...], int]


class LibraError(Exception):
    """Base class for library errors."""


class InvalidProbabilityError(LibraError, ValueError):
    pass


class ModelError(LibraError, ValueError):
    pass


class DecompositionError(LibraError, ValueError):
    pass


def weight_from_probability(p: float) -> float:
    """Return ``ln((1 - p) / p)`` for an error channel with probability ``p``."""
    if not (0.0 < p < 0.5):
        raise InvalidProbabilityError(f"probability must lie in (0, 0.5), got {p!r}")
    return math.log1p((1.0 - 2.0 * p) / p)


def bits_of(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m ^= 1 << i
    return m


@dataclass(frozen=True)
class Hyperedge:
    detectors: Tuple[int, ...]
    probability: float
    observables: int = 0
    decomposition: Optional[Tuple[Component, ...]] = None
    weight: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dets = tuple(int(d) for d in self.detectors)
        if any(b <= a for a, b in zip(dets, dets[1:])):
            raise ModelError(f"hyperedge detectors must be sorted and unique: {dets}")
        if dets and dets[0] < 0:
            raise ModelError(f"negative detector index in {dets}")
        object.__setattr__(self, "detectors", dets)
        object.__setattr__(self, "weight", weight_from_probability(self.probability))
        if self.decomposition is not None:
            comps = tuple((tuple(sorted(c)), int(o)) for c, o in self.decomposition)
            object.__setattr__(self, "decomposition", comps)
            det_acc, obs_acc = 0, 0
            for c, o in comps:
                if len(set(c)) != len(c):
                    raise DecompositionError(f"repeated detector inside component {c}")
                if len(c) > 2:
                    raise DecompositionError(f"decomposition component {c} has more than 2 detectors")
                det_acc ^= mask_of(c)
                obs_acc ^= o
            if det_acc != mask_of(dets) or obs_acc != self.observables:
                raise DecompositionError(
                    f"decomposition {comps} does not XOR to detectors {dets} / observables {self.observables:#x}"
                )

    @property
    def degree(self) -> int:
        return len(self.detectors)

    def components(self) -> Tuple[Component, ...]:
        """Graphlike pieces: the decomposition hint, or the edge itself."""
        if self.decomposition is not None:
            return self.decomposition
        return ((self.detectors, self.observables),)

    def with_probability(self, p: float) -> "Hyperedge":
        return Hyperedge(self.detectors, p, self.observables, self.decomposition)


@dataclass(eq=False)
class ErrorModel:
    """Immutable weighted hypergraph.

    ``logical_representatives`` are configurations with empty syndrome and a
    nonzero observable mask; they move a matching into the other class.
    """

    num_detectors: int
    num_observables: int
    edges: Tuple[Hyperedge, ...]
    logical_representatives: Tuple[frozenset, ...] = ()

    def __post_init__(self):
        self.edges = tuple(self.edges)
        self.logical_representatives = tuple(frozenset(r) for r in self.logical_representatives)
        for i, e in enumerate(self.edges):
            if e.detectors and e.detectors[-1] >= self.num_detectors:
                raise ModelError(f"edge {i} references detector {e.detectors[-1]} >= {self.num_detectors}")
            if e.observables >> self.num_observables:
                raise ModelError(f"edge {i} references an observable >= {self.num_observables}")
        self.det_masks = [mask_of(e.detectors) for e in self.edges]
        self.obs_masks = [e.observables for e in self.edges]
        self.weights = np.array([e.weight for e in self.edges], dtype=np.float64)
        self.probabilities = np.array([e.probability for e in self.edges], dtype=np.float64)
        self._weight_list = self.weights.tolist()
        for k, rep in enumerate(self.logical_representatives):
            self._check_config(rep)
            if self.syndrome_mask(rep) != 0:
                raise ModelError(f"logical representative {k} has a nonempty syndrome")
            if observable_of(rep, self) == 0:
                raise ModelError(f"logical representative {k} has a zero observable mask")

    def __len__(self) -> int:
        return len(self.edges)

    def _check_config(self, config: AbstractSet[int]) -> None:
        n = len(self.edges)
        for i in config:
            if not 0 <= i < n:
                raise ModelError(f"edge index {i} out of range for a model with {n} edges")

    def syndrome_mask(self, config: Iterable[int]) -> int:
        m = 0
        masks = self.det_masks
        for i in config:
            m ^= masks[i]
        return m

    def weight_of(self, i: int) -> float:
        return self._weight_list[i]

    def with_probabilities(self, probabilities: Sequence[float]) -> "ErrorModel":
        """Copy of the model with every edge probability replaced."""
        if len(probabilities) != len(self.edges):
            raise ModelError("one probability per edge required")
        edges = tuple(e.with_probability(float(p)) for e, p in zip(self.edges, probabilities))
        return ErrorModel(self.num_detectors, self.num_observables, edges, self.logical_representatives)


def syndrome_of(config: Iterable[int], model: ErrorModel) -> frozenset:
    return frozenset(bits_of(model.syndrome_mask(config)))


def observable_of(config: Iterable[int], model: ErrorModel) -> int:
    m = 0
    obs = model.obs_masks
    for i in config:
        m ^= obs[i]
    return m


def config_weight(config: Iterable[int], model: ErrorModel) -> float:
    w = model._weight_list
    return math.fsum(w[i] for i in config)


def config_xor(a: AbstractSet[int], b: AbstractSet[int]) -> frozenset:
    return frozenset(a) ^ frozenset(b)


class InfeasibleSyndromeError(LibraError, ValueError):
    pass


def gf2_solve(columns: List[int], target: int) -> Tuple[int, List[int]]:
    """Particular solution and kernel basis of ``sum_i x_i columns[i] = target``.

    Columns and target are detector bitmasks; solutions are edge bitmasks.
    """
    pivots: dict = {}
    kernel = []
    for i, col in enumerate(columns):
        v, combo = col, 1 << i
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = (v, combo)
                break
            pv, pc = pivots[top]
            v ^= pv
            combo ^= pc
        if not v:
            kernel.append(combo)
    v, combo = target, 0
    while v:
        top = v.bit_length() - 1
        if top not in pivots:
            raise InfeasibleSyndromeError("syndrome is not reachable by any set of hyperedges")
        pv, pc = pivots[top]
        v ^= pv
        combo ^= pc
    return combo, kernel
