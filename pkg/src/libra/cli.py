"""Command-line entry point: ``libra gen | bench | oracle``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .bench import BenchConfig, BenchConfigError, parse_int_list, parse_sigmas, run_experiment, write_report
from .dem import load_model, save_model
from .hypergraph import LibraError, config_weight
from .matcher import correlated_decode
from .oracle import exact_mwhpm
from .sampler import sample_shot
from .surface import SurfaceParams, generate


def _add_noise_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--p", type=float, default=2e-3, help="base noise; data channels default to p/10")
    for name in ("x", "z", "y", "m"):
        ap.add_argument(f"--p-{name}", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="libra", description="Ensemble hypergraph decoding experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a phenomenological surface-code memory model")
    gen.add_argument("--distance", type=int, required=True)
    gen.add_argument("--rounds", type=int, required=True)
    _add_noise_flags(gen)
    gen.add_argument("--out", required=True)

    bench = sub.add_parser("bench", help="decode sampled shots with the four decoders")
    src = bench.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--distance", help="comma-separated list")
    bench.add_argument("--rounds", default=None, help="comma-separated list (LER rounds for --model)")
    _add_noise_flags(bench)
    bench.add_argument("--shots", type=int, required=True)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--ensemble-size", default="20", help="comma-separated list")
    bench.add_argument("--sigmas", default="ln2,ln4")
    bench.add_argument("--gap-threshold-db", type=float, default=20.0)
    bench.add_argument("--heap-size", type=int, default=30)
    bench.add_argument("--passes", type=int, default=2)
    bench.add_argument("--topology", choices=("sequential", "tree"), default="sequential")
    bench.add_argument("--decoders", default="baseline,global,libra,libra-degen")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", required=True)
    bench.add_argument("--csv", default=None)
    bench.add_argument("--debug-truth", action="store_true")

    orc = sub.add_parser("oracle", help="compare correlated matching against the exact solver")
    orc.add_argument("--model", required=True)
    orc.add_argument("--shots", type=int, required=True)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--max-edges", type=int, default=25)
    orc.add_argument("--out", required=True)
    return ap


def _cmd_gen(args) -> int:
    params = SurfaceParams.from_p(args.distance, args.rounds, args.p, **_overrides(args))
    save_model(generate(params), args.out)
    return 0


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("p_x", "p_z", "p_y", "p_m") if getattr(args, k) is not None}


def _cmd_bench(args) -> int:
    if args.model is not None:
        distances: tuple = ()
        rounds = parse_int_list(args.rounds or "1", "--rounds")
    else:
        if args.rounds is None:
            raise BenchConfigError("--distance needs --rounds")
        distances = parse_int_list(args.distance, "--distance")
        rounds = parse_int_list(args.rounds, "--rounds")
    cfg = BenchConfig(
        shots=args.shots,
        seed=args.seed,
        distances=distances,
        rounds=rounds,
        ensemble_sizes=parse_int_list(args.ensemble_size, "--ensemble-size"),
        model_path=args.model,
        p=args.p,
        sigmas=parse_sigmas(args.sigmas),
        gap_threshold_db=args.gap_threshold_db,
        heap_size=args.heap_size,
        passes=args.passes,
        topology=args.topology,
        decoders=tuple(d.strip() for d in args.decoders.split(",") if d.strip()),
        workers=args.workers,
        debug_truth=args.debug_truth,
        **_overrides(args),
    )
    write_report(run_experiment(cfg), args.out, args.csv)
    return 0


def _cmd_oracle(args) -> int:
    model = load_model(args.model)
    shots = []
    agree = 0
    for k in range(args.shots):
        shot = sample_shot(model, args.seed, k)
        exact = exact_mwhpm(model, shot.syndrome, edge_budget=args.max_edges)
        approx = correlated_decode(model, shot.syndrome)
        same = abs(approx.weight - exact.weight) <= 1e-9 * max(1.0, exact.weight)
        agree += same
        shots.append({
            "shot_index": k,
            "syndrome": sorted(shot.syndrome),
            "oracle_config": sorted(exact.config),
            "oracle_weight": float(f"{exact.weight:.12g}"),
            "matcher_weight": float(f"{config_weight(approx.config, model):.12g}"),
            "matcher_optimal": bool(same),
        })
    doc = {"model": str(args.model), "seed": args.seed, "shots": shots,
           "optimal_fraction": float(f"{agree / max(args.shots, 1):.12g}")}
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"gen": _cmd_gen, "bench": _cmd_bench, "oracle": _cmd_oracle}[args.command]
    try:
        return handler(args)
    except (LibraError, OSError, ValueError) as exc:
        print(f"libra {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
