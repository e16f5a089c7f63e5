"""Run the desk-scale accuracy sweep and print a summary table.

Defaults reproduce the Monte Carlo cells of the acceptance suite:
Y-biased phenomenological noise, s = 20, d in {3, 5}, r in {10, 150}.
Cells are independent runs, so a partial sweep can be resumed by
listing only the missing cells.

    python scripts/run_sweep.py --shots 200000 --out sweep.json
"""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from libra.bench import BenchConfig, report_json, run_experiment

NOISE = dict(p_x=0.0015, p_z=0.0015, p_y=0.0075, p_m=0.015)


def parse_cells(text: str):
    cells = []
    for tok in text.split(","):
        d, r = tok.split("x")
        cells.append((int(d), int(r)))
    return cells


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--cells", default="3x10,5x10,3x150", help="comma list of DxR")
    ap.add_argument("--shots", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--ensemble-size", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="sweep.json")
    args = ap.parse_args()

    reports = []
    for d, r in parse_cells(args.cells):
        cfg = BenchConfig(shots=args.shots, seed=args.seed, distances=(d,), rounds=(r,),
                          ensemble_sizes=(args.ensemble_size,), workers=args.workers, **NOISE)
        t0 = time.perf_counter()
        rep = run_experiment(cfg)
        dt = time.perf_counter() - t0
        reports.append(rep)
        cell = rep["cells"][0]
        line = [f"d={d:<2d} r={r:<4d} invoked={cell['invocation_fraction']:.4f}"]
        for name, v in cell["decoders"].items():
            ratio = v["improvement_ratio"]
            line.append(f"{name}: eps={v['ler']:.3e} ratio={ratio if ratio is None else round(ratio, 3)}")
        print(" | ".join(line) + f" | {dt / 60:.1f} min", flush=True)
    Path(args.out).write_text(json.dumps([json.loads(report_json(r)) for r in reports], sort_keys=True, indent=2))


if __name__ == "__main__":
    main()
