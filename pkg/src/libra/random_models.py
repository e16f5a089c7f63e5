"""Small random decomposable error models for property tests and oracle runs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .hypergraph import ErrorModel, Hyperedge, gf2_solve


@dataclass(frozen=True)
class RandomModelSpec:
    max_detectors: int = 15
    max_edges: int = 25
    min_detectors: int = 3
    p_low: float = 0.01
    p_high: float = 0.3
    hyper_fraction: float = 0.3
    # kernel dimension bound keeps exhaustive enumeration cheap
    max_extra_edges: int = 8


def _graph_component(rng: np.random.Generator, n: int) -> Tuple[int, ...]:
    if rng.random() < 0.3:
        return (int(rng.integers(n)),)
    a, b = rng.choice(n, size=2, replace=False)
    return tuple(sorted((int(a), int(b))))


def _find_representative(edges: List[Hyperedge], n: int) -> Optional[frozenset]:
    _, kernel = gf2_solve([sum(1 << d for d in e.detectors) for e in edges], 0)
    best = None
    for vec in kernel:
        members = [i for i in range(len(edges)) if vec >> i & 1]
        obs = 0
        for i in members:
            obs ^= edges[i].observables
        if obs and (best is None or len(members) < len(best)):
            best = members
    return None if best is None else frozenset(best)


def random_model(rng: np.random.Generator, spec: RandomModelSpec = RandomModelSpec(),
                 tries: int = 100) -> ErrorModel:
    """Random model with one observable bit and one logical representative.

    Graphlike edges are distinct random detector pairs or single detectors;
    hyperedges are XORs of two existing graph edges with those as hints, so
    every matched slot has a standalone mechanism.
    """
    for _ in range(tries):
        n = int(rng.integers(spec.min_detectors, spec.max_detectors + 1))
        m_hi = min(spec.max_edges, n + spec.max_extra_edges)
        m = int(rng.integers(max(2, n // 2), m_hi + 1))
        n_hyper = int(rng.binomial(m, spec.hyper_fraction))
        graph: dict = {}
        while len(graph) < m - n_hyper and len(graph) < n * (n + 1) // 2:
            c = _graph_component(rng, n)
            graph.setdefault(c, int(rng.random() < 0.3))
        comps = sorted(graph)
        edges = [Hyperedge(c, float(rng.uniform(spec.p_low, spec.p_high)), graph[c]) for c in comps]
        seen = set()
        for _ in range(4 * n_hyper):
            if len(edges) >= m or len(comps) < 2:
                break
            i, j = sorted(rng.choice(len(comps), size=2, replace=False))
            c1, c2 = comps[i], comps[j]
            dets = tuple(sorted(set(c1) ^ set(c2)))
            if len(dets) <= 2 or dets in seen:
                continue
            seen.add(dets)
            p = float(rng.uniform(spec.p_low, spec.p_high))
            edges.append(Hyperedge(dets, p, graph[c1] ^ graph[c2], ((c1, graph[c1]), (c2, graph[c2]))))
        if len(edges) < 2:
            continue
        rep = _find_representative(edges, n)
        if rep is None:
            continue
        return ErrorModel(n, 1, edges, (rep,))
    raise RuntimeError("could not build a random model with a logical representative")


def random_syndrome(model: ErrorModel, rng: np.random.Generator) -> frozenset:
    """Syndrome of an independent draw from the model's channels."""
    fired = np.flatnonzero(rng.random(len(model.edges)) < model.probabilities)
    det = 0
    for i in fired:
        det ^= model.det_masks[i]
    return frozenset(i for i in range(model.num_detectors) if det >> i & 1)
