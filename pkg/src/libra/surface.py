"""Phenomenological rotated-surface-code memory experiment (Z basis).

Data qubit ``(row, col)``; plaquette ``(a, b)`` sits at the corner shared by
qubits ``(a-1, b-1) .. (a, b)``.  Z plaquettes live in the bulk with
``a + b`` odd and on the top/bottom boundaries; X plaquettes in the bulk with
``a + b`` even and on the left/right boundaries.  A row of X errors is a
logical operator, and the observable is the Z parity of column 0.

Each round every data qubit suffers independent X, Z and Y mechanisms, and
every stabilizer measurement flips with ``p_m``.  A Y mechanism is the XOR of
the X and Z ones and carries that split as its decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .hypergraph import ErrorModel, Hyperedge, observable_of, syndrome_of


@dataclass(frozen=True)
class SurfaceParams:
    distance: int
    rounds: int
    p_x: float
    p_z: float
    p_y: float
    p_m: float

    def __post_init__(self):
        if self.distance < 3 or self.distance % 2 == 0:
            raise ValueError(f"distance must be odd and >= 3, got {self.distance}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        for name in ("p_x", "p_z", "p_y", "p_m"):
            p = getattr(self, name)
            if not 0.0 < p < 0.5:
                raise ValueError(f"{name} must lie in (0, 0.5), got {p}")

    @classmethod
    def from_p(cls, distance: int, rounds: int, p: float = 2e-3, **overrides) -> "SurfaceParams":
        """Default noise hierarchy: data channels at ``p/10``, measurement at ``p``."""
        kw = dict(p_x=p / 10, p_z=p / 10, p_y=p / 10, p_m=p)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(distance, rounds, **kw)


def plaquettes(d: int) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    """(Z plaquettes, X plaquettes) as corner coordinates, row-major."""
    z, x = [], []
    for a in range(d + 1):
        for b in range(d + 1):
            bulk = 0 < a < d and 0 < b < d
            if bulk:
                (z if (a + b) % 2 else x).append((a, b))
            elif a in (0, d) and 0 < b < d and (a + b) % 2:
                z.append((a, b))
            elif b in (0, d) and 0 < a < d and (a + b) % 2 == 0:
                x.append((a, b))
    return z, x


def _support(a: int, b: int, d: int) -> List[Tuple[int, int]]:
    return [(r, c) for r in (a - 1, a) for c in (b - 1, b) if 0 <= r < d and 0 <= c < d]


@dataclass
class SurfaceLayout:
    """Detector numbering shared by the generator and its tests."""

    params: SurfaceParams
    z_checks: List[Tuple[int, int]]
    x_checks: List[Tuple[int, int]]
    z_of_qubit: Dict[Tuple[int, int], List[int]]
    x_of_qubit: Dict[Tuple[int, int], List[int]]

    @classmethod
    def build(cls, params: SurfaceParams) -> "SurfaceLayout":
        d = params.distance
        z, x = plaquettes(d)
        z_of: Dict[Tuple[int, int], List[int]] = {(r, c): [] for r in range(d) for c in range(d)}
        x_of: Dict[Tuple[int, int], List[int]] = {(r, c): [] for r in range(d) for c in range(d)}
        for k, (a, b) in enumerate(z):
            for q in _support(a, b, d):
                z_of[q].append(k)
        for k, (a, b) in enumerate(x):
            for q in _support(a, b, d):
                x_of[q].append(k)
        return cls(params, z, x, z_of, x_of)

    @property
    def num_z_detectors(self) -> int:
        return len(self.z_checks) * (self.params.rounds + 1)

    @property
    def num_x_detectors(self) -> int:
        return len(self.x_checks) * max(self.params.rounds - 1, 0)

    def z_detector(self, check: int, layer: int) -> int:
        # layers 0..rounds
        return layer * len(self.z_checks) + check

    def x_detector(self, check: int, layer: int) -> Optional[int]:
        # layers 0..rounds-2; layer k compares rounds k and k+1
        if not 0 <= layer <= self.params.rounds - 2:
            return None
        return self.num_z_detectors + layer * len(self.x_checks) + check


def generate(params: SurfaceParams) -> ErrorModel:
    lay = SurfaceLayout.build(params)
    d, r = params.distance, params.rounds
    edges: List[Hyperedge] = []
    x_mech: Dict[Tuple[int, int, int], int] = {}

    def add(dets, p, obs=0, decomposition=None) -> Optional[int]:
        dets = tuple(sorted(dets))
        if not dets:
            return None
        edges.append(Hyperedge(dets, p, obs, decomposition))
        return len(edges) - 1

    for t in range(r):
        for row in range(d):
            for col in range(d):
                q = (row, col)
                obs = 1 if col == 0 else 0
                # X error before round t flips Z-detectors of layer t
                zd = tuple(sorted(lay.z_detector(k, t) for k in lay.z_of_qubit[q]))
                # Z error before round t flips X-detectors comparing rounds t-1, t
                xd = tuple(sorted(
                    det for det in (lay.x_detector(k, t - 1) for k in lay.x_of_qubit[q]) if det is not None
                ))
                x_mech[(t, row, col)] = add(zd, params.p_x, obs)
                add(xd, params.p_z)
                if zd and xd:
                    add(zd + xd, params.p_y, obs, ((zd, obs), (xd, 0)))
                else:
                    add(zd or xd, params.p_y, obs if zd else 0)
        for k in range(len(lay.z_checks)):
            add((lay.z_detector(k, t), lay.z_detector(k, t + 1)), params.p_m)
        for k in range(len(lay.x_checks)):
            add([det for det in (lay.x_detector(k, t - 1), lay.x_detector(k, t)) if det is not None], params.p_m)

    reps = [frozenset(x_mech[(r - 1, row, col)] for col in range(d)) for row in range(d)]
    model = ErrorModel(lay.num_z_detectors + lay.num_x_detectors, 1, tuple(edges), tuple(reps))
    for rep in reps:
        assert not syndrome_of(rep, model) and observable_of(rep, model) == 1
    return model
