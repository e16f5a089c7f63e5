"""Experiment runner: one shot stream per (d, r), four decoders, JSON/CSV report."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .decoder import LN2, LN4, LibraConfig, LibraDecoder
from .dem import load_model
from .hypergraph import ErrorModel, LibraError, config_weight
from .sampler import sample_shot
from .stats import (
    improvement_from_counts,
    logical_error_rate,
    logical_error_rate_sigma,
    suppression_ratio,
)
from .surface import SurfaceParams, generate

DECODERS = ("baseline", "global", "libra", "libra-degen")
SCHEMA_VERSION = 1
SCHEMA_PATH = Path(__file__).with_name("report_schema.json")


class BenchConfigError(LibraError, ValueError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    shots: int
    seed: int = 0
    distances: Tuple[int, ...] = (3,)
    rounds: Tuple[int, ...] = (3,)
    ensemble_sizes: Tuple[int, ...] = (20,)
    model_path: Optional[str] = None
    p: float = 2e-3
    p_x: Optional[float] = None
    p_z: Optional[float] = None
    p_y: Optional[float] = None
    p_m: Optional[float] = None
    sigmas: Tuple[float, ...] = (LN2, LN4)
    gap_threshold_db: float = 20.0
    heap_size: int = 30
    passes: int = 2
    topology: str = "sequential"
    decoders: Tuple[str, ...] = DECODERS
    workers: int = 1
    chunk: int = 2000
    debug_truth: bool = False

    def __post_init__(self):
        if self.shots <= 0:
            raise BenchConfigError("--shots must be positive")
        bad = [d for d in self.decoders if d not in DECODERS]
        if bad or not self.decoders:
            raise BenchConfigError(f"unknown decoders {bad}; choose from {','.join(DECODERS)}")
        if self.workers < 1 or self.chunk < 1:
            raise BenchConfigError("--workers and chunk size must be positive")
        if self.model_path is None and any(d < 2 for d in self.distances):
            raise BenchConfigError("--distance must be >= 2")
        if any(r < 1 for r in self.rounds):
            raise BenchConfigError("--rounds must be >= 1")
        if any(s < 0 for s in self.ensemble_sizes):
            raise BenchConfigError("--ensemble-size must be >= 0")

    def surface_params(self, distance: int, rounds: int) -> SurfaceParams:
        overrides = {k: v for k, v in (("p_x", self.p_x), ("p_z", self.p_z), ("p_y", self.p_y), ("p_m", self.p_m))
                     if v is not None}
        return SurfaceParams.from_p(distance, rounds, self.p, **overrides)

    def libra_config(self, ensemble_size: int) -> LibraConfig:
        # no ensemble decoder requested: predictions are the baseline anyway
        if not set(self.decoders) & {"global", "libra", "libra-degen"}:
            ensemble_size = 0
        return LibraConfig(
            ensemble_size=ensemble_size,
            sigmas=tuple(self.sigmas),
            gap_threshold_db=self.gap_threshold_db,
            store_capacity=self.heap_size,
            topology=self.topology,
            passes=self.passes,
            master_seed=self.seed,
        )

    def cells(self) -> List[Tuple[Optional[int], int]]:
        if self.model_path is not None:
            return [(None, r) for r in self.rounds]
        return [(d, r) for d in self.distances for r in self.rounds]


def _model_for(cfg: BenchConfig, distance: Optional[int], rounds: int) -> ErrorModel:
    if cfg.model_path is not None:
        try:
            return load_model(cfg.model_path)
        except OSError as exc:
            raise BenchConfigError(f"cannot read model file {cfg.model_path}: {exc}") from exc
    return generate(cfg.surface_params(distance, rounds))


_COUNTERS = ("invoked", "heuristic", "improving_cycles", "stored_cycles", "truth_shots", "baseline_below_truth")


def _empty_counts() -> Dict[str, int]:
    out = {f"fail_{d}": 0 for d in DECODERS}
    out.update({k: 0 for k in _COUNTERS})
    return out


def _run_chunk(args) -> Dict[str, int]:
    cfg, distance, rounds, ensemble_size, start, count = args
    model = _model_for(cfg, distance, rounds)
    dec = LibraDecoder(model, cfg.libra_config(ensemble_size))
    out = _empty_counts()
    for k in range(start, start + count):
        shot = sample_shot(model, cfg.seed, k, keep_config=cfg.debug_truth)
        pred = dec.decode(shot.syndrome)
        truth = shot.true_observables
        out["fail_baseline"] += pred.baseline_observables != truth
        out["fail_global"] += pred.predicted_observables_global != truth
        out["fail_libra"] += pred.predicted_observables_bestweight != truth
        out["fail_libra-degen"] += pred.predicted_observables_degeneracy != truth
        out["invoked"] += pred.ensemble_invoked
        diag = pred.diagnostics
        out["heuristic"] += not diag.get("baseline_exact", True)
        out["improving_cycles"] += diag.get("improving_cycles", 0)
        out["stored_cycles"] += sum(diag.get("stored_cycles", ()))
        if cfg.debug_truth:
            out["truth_shots"] += 1
            out["baseline_below_truth"] += diag["baseline_weight"] <= config_weight(shot.true_config, model) + 1e-9
    return out


def _count_cell(cfg: BenchConfig, distance: Optional[int], rounds: int, ensemble_size: int,
                pool: Optional[ProcessPoolExecutor]) -> Dict[str, int]:
    jobs = [(cfg, distance, rounds, ensemble_size, s, min(cfg.chunk, cfg.shots - s))
            for s in range(0, cfg.shots, cfg.chunk)]
    parts = pool.map(_run_chunk, jobs) if pool is not None else map(_run_chunk, jobs)
    total = _empty_counts()
    for part in parts:
        for k, v in part.items():
            total[k] += int(v)
    return total


def _round(x: float) -> Optional[float]:
    # fixed precision keeps reports byte-stable across platforms
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _cell_report(cfg: BenchConfig, distance, rounds, ensemble_size, counts, model: ErrorModel) -> dict:
    n = cfg.shots
    nb = counts["fail_baseline"]
    decoders = {}
    for name in cfg.decoders:
        nf = counts[f"fail_{name}"]
        eps = logical_error_rate(nf, n, rounds)
        ratio = improvement_from_counts(nb, nf, n, rounds)
        decoders[name] = {
            "failures": nf,
            "ler": _round(eps),
            "ler_sigma": _round(logical_error_rate_sigma(nf, n, rounds)),
            "improvement_ratio": _round(ratio.value),
            "improvement_sigma": _round(ratio.sigma),
            "improvement_lower_bound": ratio.lower_bound,
        }
    invoked = counts["invoked"]
    diagnostics = {
        "heuristic_baseline_shots": counts["heuristic"],
        "mean_improving_cycles": _round(counts["improving_cycles"] / invoked) if invoked else 0.0,
        "mean_stored_cycles": _round(counts["stored_cycles"] / invoked) if invoked else 0.0,
    }
    if cfg.debug_truth:
        diagnostics["baseline_weight_le_truth_fraction"] = _round(counts["baseline_below_truth"] / n)
    return {
        "distance": distance,
        "rounds": rounds,
        "ensemble_size": ensemble_size,
        "shots": n,
        "seed": cfg.seed,
        "num_detectors": model.num_detectors,
        "num_mechanisms": len(model.edges),
        "invoked": invoked,
        "invocation_fraction": _round(invoked / n),
        "decoders": decoders,
        "diagnostics": diagnostics,
    }


def _lambdas(cfg: BenchConfig, cells: List[dict]) -> List[dict]:
    out = []
    by_key: Dict[Tuple[int, int], Dict[int, dict]] = {}
    for c in cells:
        if c["distance"] is not None:
            by_key.setdefault((c["rounds"], c["ensemble_size"]), {})[c["distance"]] = c
    for (r, s), group in sorted(by_key.items()):
        for da, db in combinations(sorted(group), 2):
            for name in cfg.decoders:
                ea, eb = group[da]["decoders"][name]["ler"], group[db]["decoders"][name]["ler"]
                value = suppression_ratio(ea, eb, da, db) if ea and eb else None
                out.append({"rounds": r, "ensemble_size": s, "decoder": name,
                            "d_small": da, "d_large": db, "value": _round(value) if value else None})
    return out


def _config_json(cfg: BenchConfig) -> dict:
    out = asdict(cfg)
    # parallelism does not change results, so it stays out of the report
    for k in ("workers", "chunk"):
        out.pop(k)
    out["sigmas"] = [_round(s) for s in cfg.sigmas]
    for k in ("distances", "rounds", "ensemble_sizes", "decoders"):
        out[k] = list(out[k])
    return out


def run_experiment(cfg: BenchConfig) -> dict:
    """Decode every (d, r, s) cell and return the report document."""
    cells = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for distance, rounds in cfg.cells():
            model = _model_for(cfg, distance, rounds)
            if model.num_observables != 1 or not model.logical_representatives:
                raise BenchConfigError("bench needs a model with one observable and a logical representative")
            for s in cfg.ensemble_sizes:
                counts = _count_cell(cfg, distance, rounds, s, pool)
                cells.append(_cell_report(cfg, distance, rounds, s, counts, model))
    finally:
        if pool is not None:
            pool.shutdown()
    return {
        "schema_version": SCHEMA_VERSION,
        "config": _config_json(cfg),
        "cells": cells,
        "lambda": _lambdas(cfg, cells),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_csv(report: dict) -> str:
    buf = io.StringIO()
    fields = ["distance", "rounds", "ensemble_size", "decoder", "shots", "failures", "ler", "ler_sigma",
              "improvement_ratio", "improvement_sigma", "improvement_lower_bound", "invocation_fraction"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for c in report["cells"]:
        for name, d in sorted(c["decoders"].items()):
            row = {k: c[k] for k in ("distance", "rounds", "ensemble_size", "shots", "invocation_fraction")}
            row.update({k: d[k] for k in fields if k in d})
            row["decoder"] = name
            w.writerow(row)
    return buf.getvalue()


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text())


def write_report(report: dict, out: str, csv_path: Optional[str] = None) -> None:
    try:
        Path(out).write_text(report_json(report))
        if csv_path:
            Path(csv_path).write_text(report_csv(report))
    except OSError as exc:
        raise BenchConfigError(f"cannot write report: {exc}") from exc


def parse_sigmas(text: str) -> Tuple[float, ...]:
    """Comma list of numbers; ``lnX`` means the natural log of X."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(math.log(float(tok[2:])) if tok.startswith("ln") else float(tok))
        except ValueError as exc:
            raise BenchConfigError(f"bad sigma {tok!r}") from exc
    if not out or any(s < 0 for s in out):
        raise BenchConfigError("sigmas must be a nonempty list of nonnegative values")
    return tuple(out)


def parse_int_list(text: str, flag: str) -> Tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError as exc:
        raise BenchConfigError(f"{flag} expects comma-separated integers, got {text!r}") from exc
    if not vals:
        raise BenchConfigError(f"{flag} is empty")
    return vals
