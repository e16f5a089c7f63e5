"""Reader and writer for the ``.dem`` text format.

Supported subset::

    error(0.01) D0 D1 ^ D1 D2 L0     # '^' separates decomposition components
    detector D7
    logical_observable L0
    #logical 3 8 12                  # edge indices of a logical representative

Everything else after ``#`` is a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Tuple

from .hypergraph import (
    DecompositionError,
    ErrorModel,
    Hyperedge,
    InvalidProbabilityError,
    LibraError,
    mask_of,
    bits_of,
)

_TOKEN = re.compile(r"\S+")
_ERROR_HEAD = re.compile(r"error\(([^()\s]*)\)$")


class DemSyntaxError(LibraError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class ModelDocument:
    declared_detectors: int
    declared_observables: int
    error_lines: List[Tuple[float, list, int]]
    logical_lines: List[Tuple[int, ...]]


def _target(tok: str, line: int, col: int) -> Tuple[str, int]:
    kind, digits = tok[:1], tok[1:]
    if kind not in ("D", "L") or not digits.isdigit():
        raise DemSyntaxError(f"bad target {tok!r}", line, col)
    return kind, int(digits)


def parse_document(text: str) -> ModelDocument:
    n_det = n_obs = 0
    errors: List[Tuple[float, list, int]] = []
    logicals: List[Tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.rstrip("\r")
        stripped = raw.lstrip()
        if stripped.startswith("#logical"):
            toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(raw)]
            if toks[0][0] != "#logical":
                raise DemSyntaxError(f"unknown directive {toks[0][0]!r}", lineno, toks[0][1])
            if len(toks) < 2:
                raise DemSyntaxError("#logical needs at least one edge index", lineno, toks[0][1])
            idx = []
            for tok, col in toks[1:]:
                if not tok.isdigit():
                    raise DemSyntaxError(f"bad edge index {tok!r}", lineno, col)
                idx.append(int(tok))
            logicals.append(tuple(idx))
            continue
        body = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if not toks:
            continue
        head, hcol = toks[0]
        if head in ("detector", "logical_observable"):
            if len(toks) != 2:
                raise DemSyntaxError(f"{head} takes exactly one target", lineno, hcol)
            kind, k = _target(toks[1][0], lineno, toks[1][1])
            if (head == "detector") != (kind == "D"):
                raise DemSyntaxError(f"{head} cannot declare {toks[1][0]}", lineno, toks[1][1])
            if kind == "D":
                n_det = max(n_det, k + 1)
            else:
                n_obs = max(n_obs, k + 1)
            continue
        m = _ERROR_HEAD.match(head)
        if m is None:
            raise DemSyntaxError(f"unexpected token {head!r}", lineno, hcol)
        try:
            p = float(m.group(1))
        except ValueError:
            raise DemSyntaxError(f"bad probability {m.group(1)!r}", lineno, hcol + 6) from None
        if not (0.0 < p < 0.5):
            raise InvalidProbabilityError(f"line {lineno}: probability {p!r} outside (0, 0.5)")
        groups: list = [[]]
        for tok, col in toks[1:]:
            if tok == "^":
                if not groups[-1]:
                    raise DemSyntaxError("empty decomposition component", lineno, col)
                groups.append([])
                continue
            kind, k = _target(tok, lineno, col)
            groups[-1].append((kind, k, col))
        if not groups[-1]:
            raise DemSyntaxError("error line needs at least one target", lineno, hcol + len(head))
        for g in groups:
            for kind, k, _ in g:
                if kind == "D":
                    n_det = max(n_det, k + 1)
                else:
                    n_obs = max(n_obs, k + 1)
        errors.append((p, [[(kind, k) for kind, k, _ in g] for g in groups], lineno))
    return ModelDocument(n_det, n_obs, errors, logicals)


def _edge_from_groups(p: float, groups: list, lineno: int) -> Hyperedge:
    comps = []
    for g in groups:
        dets = [k for kind, k in g if kind == "D"]
        if len(set(dets)) != len(dets):
            raise DecompositionError(f"line {lineno}: repeated detector inside one component")
        comps.append((tuple(sorted(dets)), mask_of(k for kind, k in g if kind == "L")))
    det_mask = obs = 0
    for dets, o in comps:
        det_mask ^= mask_of(dets)
        obs ^= o
    decomposition = tuple(comps) if len(comps) > 1 else None
    try:
        return Hyperedge(tuple(bits_of(det_mask)), p, obs, decomposition)
    except DecompositionError as exc:
        raise DecompositionError(f"line {lineno}: {exc}") from None


def parse_model(text: str) -> ErrorModel:
    doc = parse_document(text)
    edges = tuple(_edge_from_groups(p, groups, lineno) for p, groups, lineno in doc.error_lines)
    for rep in doc.logical_lines:
        for i in rep:
            if i >= len(edges):
                raise DemSyntaxError(f"#logical references edge {i} but only {len(edges)} edges exist", 0, 0)
    reps = tuple(frozenset(_xor_indices(rep)) for rep in doc.logical_lines)
    return ErrorModel(doc.declared_detectors, doc.declared_observables, edges, reps)


def _xor_indices(indices):
    out = set()
    for i in indices:
        out ^= {i}
    return out


def _targets(dets, obs: int) -> str:
    return " ".join([f"D{d}" for d in dets] + [f"L{k}" for k in bits_of(obs)])


def serialize_model(model: ErrorModel) -> str:
    lines = ["# libra error model"]
    if model.num_detectors:
        lines.append(f"detector D{model.num_detectors - 1}")
    if model.num_observables:
        lines.append(f"logical_observable L{model.num_observables - 1}")
    for e in model.edges:
        if e.decomposition is not None:
            body = " ^ ".join(_targets(d, o) for d, o in e.decomposition)
        else:
            body = _targets(e.detectors, e.observables)
        lines.append(f"error({e.probability!r}) {body}")
    for rep in model.logical_representatives:
        lines.append("#logical " + " ".join(str(i) for i in sorted(rep)))
    return "\n".join(lines) + "\n"


def load_model(path) -> ErrorModel:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_model(fh.read())


def save_model(model: ErrorModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_model(model))
