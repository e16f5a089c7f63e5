"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict, printed together in the
terminal summary.  Criteria 6-8 share three Monte Carlo cells of 2e5 shots
(d=3 r=10, d=5 r=10, d=3 r=150) and take roughly 75 minutes on one core.
"""
from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from libra.bench import BenchConfig, run_experiment
from libra.cli import main
from libra.decoder import LibraConfig, LibraDecoder, perturb_model
from libra.hypergraph import ErrorModel, Hyperedge, config_weight, observable_of, syndrome_of
from libra.oracle import exact_mwhpm
from libra.random_models import RandomModelSpec, random_model, random_syndrome
from libra.stats import (
    binomial_z,
    improvement_ratio,
    invocation_z,
    logical_error_rate,
    suppression_ratio,
)
from libra.synthesis import PositiveCycleStore, degeneracy_factor, relative_weight, synthesize

from conftest import ACCEPTANCE_NOISE

CRITERIA: dict = {}

# measured by scripts/derive_oracles.py (rng seed 99): Libra reached the exact weight on 499 of 500
LIBRA_EXACT_FLOOR = 499
MC_SHOTS = 200_000
MC_SEED = 2026
ENSEMBLE = 20


def record(k: int, ok: bool, detail: str) -> None:
    CRITERIA[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}"
    print(CRITERIA[k], flush=True)


# ---------------------------------------------------------------- 1

def test_criterion_1_synthesis_correctness():
    rng = np.random.default_rng(1)
    spec = RandomModelSpec(max_detectors=15, max_edges=25, p_low=0.01, p_high=0.3)
    start = time.perf_counter()
    bad = no_logical = 0
    n = 10_000
    for i in range(n):
        m = random_model(rng, spec)
        s = random_syndrome(m, rng)
        a = exact_mwhpm(perturb_model(m, math.log(2), i, 0), s).config
        b = exact_mwhpm(perturb_model(m, math.log(2), i, 1), s).config
        r = synthesize(a, b, m, PositiveCycleStore(30))
        wr, wa, wb = (config_weight(x, m) for x in (r.config, a, b))
        ok = syndrome_of(r.config, m) == s and observable_of(r.config, m) == observable_of(a, m)
        ok = ok and wr <= wa + 1e-9
        if not r.logicals:
            no_logical += 1
            ok = ok and wr <= min(wa, wb) + 1e-9
        bad += not ok
    elapsed = time.perf_counter() - start
    passed = bad == 0 and elapsed < 60
    record(1, passed, f"{n - bad}/{n} cases hold ({no_logical} without logical pieces), {elapsed:.1f} s")
    assert passed


# ---------------------------------------------------------------- 2

def test_criterion_2_oracle_convergence():
    rng = np.random.default_rng(99)
    spec = RandomModelSpec(max_detectors=14, max_edges=22)
    start = time.perf_counter()
    hits = below = 0
    n = 500
    for _ in range(n):
        m = random_model(rng, spec)
        s = random_syndrome(m, rng)
        exact = exact_mwhpm(m, s).weight
        pred = LibraDecoder(m, LibraConfig(ensemble_size=100, gap_threshold_db=math.inf, passes=2)).decode(s)
        w = min(pred.diagnostics["class_weights"])
        hits += abs(w - exact) <= 1e-9
        below += w < exact - 1e-9
    elapsed = time.perf_counter() - start
    frac = hits / n
    passed = frac >= 0.95 and below == 0 and hits >= LIBRA_EXACT_FLOOR and elapsed < 600
    record(2, passed, f"exact on {hits}/{n} = {frac:.1%} (floor {LIBRA_EXACT_FLOOR}), below exact {below}, "
                      f"{elapsed:.1f} s")
    assert passed


# ---------------------------------------------------------------- 3

def test_criterion_3_relative_weight_identity():
    rng = np.random.default_rng(3)
    worst = 0.0
    n = 10_000
    for _ in range(n):
        m = random_model(rng)
        k = len(m)
        c = frozenset(np.flatnonzero(rng.random(k) < rng.random()).tolist())
        e = frozenset(np.flatnonzero(rng.random(k) < rng.random()).tolist())
        diff = relative_weight(c, e, m) - (config_weight(c ^ e, m) - config_weight(e, m))
        worst = max(worst, abs(diff))
    passed = worst <= 1e-9
    record(3, passed, f"max |error| {worst:.2e} over {n} cases")
    assert passed


# ---------------------------------------------------------------- 4

def _random_store(rng, sizes, base_p=0.3):
    """Model, base and store whose cycles form overlap groups of the given sizes, or None."""
    pools, offset = [], 0
    for _ in sizes:
        n = int(rng.integers(8, 11))
        pools.append(list(range(offset, offset + n)))
        offset += n
    m = ErrorModel(1, 0, [Hyperedge((0,), float(rng.uniform(0.01, 0.3))) for _ in range(offset)])
    base = frozenset(i for i in range(offset) if rng.random() < base_p)
    store = PositiveCycleStore(64, base)
    for size, pool in zip(sizes, pools):
        made = 0
        for _ in range(1000):
            # every cycle of a group shares the anchor edge, so the group is overlap-connected
            c = frozenset([pool[0]] + [e for e in pool[1:] if rng.random() < 0.5])
            rel = relative_weight(c, base, m)
            if rel >= 0 and store.offer(c, rel):
                made += 1
                if made == size:
                    break
        else:
            return None
    return m, base, store


def _exhaustive(store, base, m) -> float:
    cycles = [c for _, c in store.entries()]
    seen = set()
    for bits in itertools.product((0, 1), repeat=len(cycles)):
        acc = frozenset()
        for b, c in zip(bits, cycles):
            if b:
                acc = acc ^ c
        seen.add(acc)
    return math.fsum(math.exp(-relative_weight(g, base, m)) for g in seen)


def test_criterion_4_degeneracy_exactness():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    trials = 0
    while trials < 300:
        sizes = [int(rng.integers(1, 9)) for _ in range(int(rng.integers(1, 3)))]
        if sum(sizes) > 12:
            continue
        made = _random_store(rng, sizes)
        if made is None:
            continue
        m, base, store = made
        got = degeneracy_factor(store, m)
        want = _exhaustive(store, base, m)
        worst = max(worst, abs(got - want) / want)
        trials += 1
    truncated_ok = 0
    truncated = 0
    while truncated < 40:
        made = _random_store(rng, [int(rng.integers(10, 13))])
        if made is None:
            continue
        m, base, store = made
        truncated += 1
        got = degeneracy_factor(store, m)
        want = _exhaustive(store, base, m)
        truncated_ok += got <= want * (1 + 1e-12)
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-9 and truncated_ok == 40 and elapsed < 60
    record(4, passed, f"max rel error {worst:.2e} on {trials} stores; truncated <= exact on {truncated_ok}/40; "
                      f"{elapsed:.1f} s")
    assert passed


# ---------------------------------------------------------------- 5

def test_criterion_5_formula_units():
    checks = {
        "ler n_f=0": logical_error_rate(0, 1000, 7) == 0.0,
        "ler x=0.5 r=1": logical_error_rate(500, 1000, 1) == 0.5,
        "ler inverse eps=0.1 r=2": abs(logical_error_rate(18, 100, 2) - 0.1) < 1e-15,
        "lambda 3,11 exponent 1/4": abs(suppression_ratio(1e-3, 1e-7, 3, 11) - 10.0) < 1e-12,
        "lambda 7,11 exponent 1/2": abs(suppression_ratio(4e-4, 1e-4, 7, 11) - 2.0) < 1e-12,
        "lambda 9,11 exponent 1": abs(suppression_ratio(3e-4, 1e-4, 9, 11) - 3.0) < 1e-12,
        "lambda equal rates": suppression_ratio(5e-5, 5e-5, 9, 11) == 1.0,
        "ratio 2e-3/1e-3": improvement_ratio(2e-3, 1e-3) == 2.0,
        "ratio equal": improvement_ratio(1e-3, 1e-3) == 1.0,
    }
    failed = [k for k, v in checks.items() if not v]
    record(5, not failed, f"{len(checks) - len(failed)}/{len(checks)} exact checks" +
           (f", failed: {failed}" if failed else ""))
    assert not failed


# ---------------------------------------------------------------- 6-8

_CELLS: dict = {}


def mc_cell(distance: int, rounds: int) -> dict:
    key = (distance, rounds)
    if key not in _CELLS:
        cfg = BenchConfig(shots=MC_SHOTS, seed=MC_SEED, distances=(distance,), rounds=(rounds,),
                          ensemble_sizes=(ENSEMBLE,), **ACCEPTANCE_NOISE)
        start = time.perf_counter()
        cell = run_experiment(cfg)["cells"][0]
        cell["elapsed"] = time.perf_counter() - start
        _CELLS[key] = cell
    return _CELLS[key]


def _rates(cell):
    d = cell["decoders"]
    return {k: (d[k]["ler"], d[k]["ler_sigma"], d[k]["failures"]) for k in ("baseline", "global", "libra")}


@pytest.mark.slow
def test_criterion_6_decoder_ordering():
    parts, ok = [], True
    for d in (3, 5):
        cell = mc_cell(d, 10)
        r = _rates(cell)
        (eb, sb, nb), (eg, sg, ng), (el, sl, nl) = r["baseline"], r["global"], r["libra"]
        order = el <= eg + 2 * math.hypot(sl, sg) and eg <= eb + 2 * math.hypot(sg, sb)
        z = binomial_z(nb, nl, cell["shots"])
        ok = ok and order and z >= 2
        parts.append(f"d={d}: eps b/g/l = {eb:.3e}/{eg:.3e}/{el:.3e} (fails {nb}/{ng}/{nl}), "
                     f"libra-vs-baseline z={z:.1f}, {cell['elapsed'] / 60:.1f} min")
    record(6, ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion_7_global_degradation():
    short, long = mc_cell(3, 10), mc_cell(3, 150)

    def ratio(cell, name):
        d = cell["decoders"][name]
        return d["improvement_ratio"], d["improvement_sigma"]

    (g10, sg10), (g150, sg150) = ratio(short, "global"), ratio(long, "global")
    (l10, sl10), (l150, sl150) = ratio(short, "libra"), ratio(long, "libra")
    drop = g10 - g150 > 2 * math.hypot(sg10, sg150)
    hold = l150 >= l10 - 2 * math.hypot(sl10, sl150)
    ok = drop and hold
    record(7, ok, f"global ratio r=10 {g10:.3f}+-{sg10:.3f} -> r=150 {g150:.3f}+-{sg150:.3f}; "
                  f"libra r=10 {l10:.3f}+-{sl10:.3f} -> r=150 {l150:.3f}+-{sl150:.3f}; "
                  f"r=150 cell {long['elapsed'] / 60:.1f} min")
    assert ok


@pytest.mark.slow
def test_criterion_8_gate_economics():
    c3, c5 = mc_cell(3, 10), mc_cell(5, 10)
    z = invocation_z(c3["invoked"], c3["shots"], c5["invoked"], c5["shots"])
    ok = z is not None and z > 2 and c3["invocation_fraction"] > c5["invocation_fraction"]
    record(8, ok, f"invoked fraction d=3 {c3['invocation_fraction']:.4f} -> d=5 {c5['invocation_fraction']:.4f}, "
                  f"z={z if z is None else round(z, 1)}")
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_9_determinism(tmp_path):
    flags = ["bench", "--distance", "3", "--rounds", "5", "--shots", "600", "--seed", "99",
             "--ensemble-size", "8", "--p", "0.01"]
    outs = []
    for name, extra in (("a", []), ("b", []), ("c", ["--workers", "2"])):
        out = tmp_path / f"{name}.json"
        assert main(flags + ["--out", str(out)] + extra) == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    record(9, ok, f"three runs (serial, serial, 2 workers) byte-identical: {ok}, {len(outs[0])} bytes")
    assert ok
