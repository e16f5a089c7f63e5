from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from libra.decoder import perturb_model
from libra.hypergraph import ErrorModel, Hyperedge, config_weight, observable_of, syndrome_of
from libra.oracle import exact_mwhpm
from libra.random_models import random_model, random_syndrome
from libra.synthesis import (
    ContractViolation,
    Piece,
    PositiveCycleStore,
    degeneracy_factor,
    generated_cycles,
    pair_logicals,
    relative_weight,
    split_null_components,
    synthesize,
)

from conftest import p_of_weight


def test_split_empty(t3):
    assert split_null_components(frozenset(), t3) == []


def test_split_t3_two_cycles(t3):
    pieces = split_null_components(frozenset({0, 1, 2, 3}), t3)
    assert [p.edges for p in pieces] == [{0, 1}, {2, 3}]
    assert all(p.kind == "cycle" for p in pieces)


def test_split_t1_one_logical(t1):
    (p,) = split_null_components(frozenset({0, 1, 2}), t1)
    assert p.kind == "logical" and p.observables == 0b1


def test_split_rejects_nonnull(t1):
    with pytest.raises(ContractViolation):
        split_null_components(frozenset({0}), t1)


def test_relative_weight_examples(t3):
    assert relative_weight({0, 1}, frozenset({1}), t3) == pytest.approx(-1.0)
    m = ErrorModel(2, 0, [Hyperedge((0,), p_of_weight(1.5)), Hyperedge((1,), p_of_weight(2.0))])
    assert relative_weight({0, 1}, frozenset(), m) == pytest.approx(3.5)


@given(st.integers(0, 2**32 - 1))
def test_relative_weight_definition(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng)
    n = len(m)
    c = frozenset(np.flatnonzero(rng.random(n) < 0.4).tolist())
    e = frozenset(np.flatnonzero(rng.random(n) < 0.4).tolist())
    assert relative_weight(c, e, m) == pytest.approx(config_weight(c ^ e, m) - config_weight(e, m), abs=1e-9)


def test_synthesize_identical_inputs(t3):
    store = PositiveCycleStore(30, frozenset({0, 3}))
    store.offer(frozenset({0, 1}), 1.0)
    r = synthesize(frozenset({0, 3}), frozenset({0, 3}), t3, store)
    assert r.config == {0, 3}
    assert len(store) == 1


def test_synthesize_t3_beats_both_inputs(t3):
    store = PositiveCycleStore(30)
    r = synthesize(frozenset({0, 3}), frozenset({1, 2}), t3, store)
    assert r.config == {0, 2}
    assert config_weight(r.config, t3) == pytest.approx(2.0)
    stored = dict((c, w) for w, c in store.entries())
    assert stored[frozenset({0, 1})] == pytest.approx(1.0)
    # undoing the applied improvement is itself a +1 cycle of the new base
    assert stored[frozenset({2, 3})] == pytest.approx(1.0)


def test_synthesize_t1_logical_reported(t1):
    r = synthesize(frozenset({0}), frozenset({1, 2}), t1)
    assert r.config == {0}
    assert [p.edges for p in r.logicals] == [{0, 1, 2}]


def test_synthesize_rejects_mismatched_syndromes(t3):
    with pytest.raises(ContractViolation):
        synthesize(frozenset({0}), frozenset({2}), t3)


def test_improvement_clears_store(t3):
    store = PositiveCycleStore(30, frozenset({0, 3}))
    store.offer(frozenset({0, 1}), 1.0)
    synthesize(frozenset({0, 3}), frozenset({0, 2}), t3, store)
    assert store.base == frozenset({0, 2})
    assert [c for _, c in store.entries()] == [frozenset({2, 3})]


def test_pair_logicals_examples():
    m = ErrorModel(2, 2, [Hyperedge((0,), 0.1, 1), Hyperedge((0,), 0.1, 1), Hyperedge((1,), 0.1, 2),
                          Hyperedge((1,), 0.1, 1)])
    l1 = Piece(frozenset({0}), 1, 0.0)
    l2 = Piece(frozenset({1}), 1, 0.0)
    l3 = Piece(frozenset({2}), 2, 0.0)
    assert pair_logicals([l1, l1], frozenset(), m) == []
    (c,) = pair_logicals([l1, l2], frozenset(), m)
    assert c.edges == {0, 1} and c.observables == 0 and c.kind == "cycle"
    assert pair_logicals([l1, l3], frozenset(), m) == []


def _matching_pair(rng):
    m = random_model(rng)
    s = random_syndrome(m, rng)
    a = exact_mwhpm(perturb_model(m, math.log(4), int(rng.integers(2**31)), 0), s).config
    b = exact_mwhpm(perturb_model(m, math.log(4), int(rng.integers(2**31)), 1), s).config
    return m, a, b


@given(st.integers(0, 2**32 - 1))
def test_synthesis_properties(seed):
    rng = np.random.default_rng(seed)
    m, a, b = _matching_pair(rng)
    store = PositiveCycleStore(30)
    r = synthesize(a, b, m, store)
    assert syndrome_of(r.config, m) == syndrome_of(a, m)
    assert observable_of(r.config, m) == observable_of(a, m)
    wr = config_weight(r.config, m)
    assert wr <= config_weight(a, m) + 1e-9
    if not r.logicals:
        assert wr <= config_weight(b, m) + 1e-9
    # idempotent against the same partner
    assert synthesize(r.config, b, m).config == r.config
    assert all(rel >= 0 for rel, _ in store.entries())


def test_store_capacity_and_dedup():
    store = PositiveCycleStore(3, frozenset())
    for k, w in enumerate([5.0, 1.0, 3.0, 2.0, 4.0]):
        store.offer(frozenset({k}), w)
    assert [w for w, _ in store.entries()] == [1.0, 2.0, 3.0]
    assert not store.offer(frozenset({1}), 1.0)
    assert store.max_weight() == 3.0
    with pytest.raises(ContractViolation):
        store.offer(frozenset({9}), -0.1)
    assert not PositiveCycleStore(0).offer(frozenset({1}), 1.0)


def test_store_zero_weight_kept():
    store = PositiveCycleStore(2, frozenset())
    assert store.offer(frozenset({1, 2}), 0.0)


def _model_with_weights(ws):
    return ErrorModel(1, 0, [Hyperedge((0,), p_of_weight(w)) for w in ws])


def test_degeneracy_empty():
    assert degeneracy_factor(PositiveCycleStore(30, frozenset()), _model_with_weights([1.0])) == 1.0


def test_degeneracy_one_cycle():
    m = _model_with_weights([1.0])
    store = PositiveCycleStore(30, frozenset())
    store.offer(frozenset({0}), 1.0)
    assert degeneracy_factor(store, m) == pytest.approx(1.36787944117144, rel=1e-12)


def test_degeneracy_two_disjoint_cycles():
    m = _model_with_weights([1.0, 1.0])
    store = PositiveCycleStore(30, frozenset())
    store.offer(frozenset({0}), 1.0)
    store.offer(frozenset({1}), 1.0)
    assert degeneracy_factor(store, m) == pytest.approx(1.8710941655795, rel=1e-12)


def test_degeneracy_overlapping_includes_xor():
    # cycles {0,1} and {1,2} relative to base {1}: weights 0.5 each, XOR {0,2} weight 2
    m = _model_with_weights([1.0, 0.5, 1.0])
    base = frozenset({1})
    store = PositiveCycleStore(30, base)
    store.offer(frozenset({0, 1}), relative_weight({0, 1}, base, m))
    store.offer(frozenset({1, 2}), relative_weight({1, 2}, base, m))
    want = 1 + 2 * math.exp(-0.5) + math.exp(-2.0)
    assert degeneracy_factor(store, m) == pytest.approx(want, rel=1e-12)


def test_generated_cycles_dedup():
    a, b = frozenset({1, 2}), frozenset({2, 3})
    assert generated_cycles([a, b, a ^ b]) == {frozenset(), a, b, a ^ b}
    assert generated_cycles([a, b], truncate=True) == {frozenset(), a, b, a ^ b}
