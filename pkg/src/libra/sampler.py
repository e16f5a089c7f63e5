"""Monte Carlo shots from independent binary error channels.

Each shot draws from its own Philox stream keyed by the master seed with the
shot index in the high counter word, so shots can be produced in any order,
in any process, and always come out the same.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, TextIO

import numpy as np

from .hypergraph import ErrorModel, bits_of

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ShotRecord:
    shot_index: int
    syndrome: frozenset
    true_observables: int
    true_config: Optional[frozenset] = None


def shot_rng(seed: int, shot_index: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=seed & _MASK64, counter=[0, 0, 0, shot_index & _MASK64])
    return np.random.Generator(bitgen)


def sample_shot(model: ErrorModel, seed: int, shot_index: int, keep_config: bool = False) -> ShotRecord:
    u = shot_rng(seed, shot_index).random(len(model.edges))
    fired = np.flatnonzero(u < model.probabilities).tolist()
    det = obs = 0
    for i in fired:
        det ^= model.det_masks[i]
        obs ^= model.obs_masks[i]
    return ShotRecord(
        shot_index,
        frozenset(bits_of(det)),
        obs,
        frozenset(fired) if keep_config else None,
    )


def sample_shots(model: ErrorModel, seed: int, count: int, start: int = 0,
                 keep_config: bool = False) -> Iterator[ShotRecord]:
    for k in range(start, start + count):
        yield sample_shot(model, seed, k, keep_config)


def format_shot(shot: ShotRecord) -> str:
    dets = " ".join(str(d) for d in sorted(shot.syndrome))
    return f"S: {dets} | O: {shot.true_observables:#x}"


def parse_shot(line: str, shot_index: int = 0) -> ShotRecord:
    left, sep, right = line.partition("|")
    left, right = left.strip(), right.strip()
    if not sep or not left.startswith("S:") or not right.startswith("O:"):
        raise ValueError(f"malformed shot line: {line!r}")
    dets = frozenset(int(t) for t in left[2:].split())
    return ShotRecord(shot_index, dets, int(right[2:].strip(), 16))


def write_shots(shots: Iterable[ShotRecord], fh: TextIO) -> None:
    for s in shots:
        fh.write(format_shot(s) + "\n")


def read_shots(fh: TextIO) -> List[ShotRecord]:
    return [parse_shot(line, k) for k, line in enumerate(l for l in fh if l.strip())]
