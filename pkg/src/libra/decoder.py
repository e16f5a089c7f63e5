"""Libra: ensemble decoding with matching synthesis.

Complementary matching gives one matching per equivalence class and the gap
between them.  Hard shots (small gap) are re-decoded by correlated matchers on
log-normally perturbed copies of the model; every member result is then
synthesized into both class matchings, using unperturbed weights throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .hypergraph import ErrorModel, LibraError, ModelError, config_weight, observable_of
from .matcher import CorrelatedMatcher, MatcherResult, matcher_for
from .synthesis import (
    PositiveCycleStore,
    degeneracy_factor,
    relative_weight,
    synthesize,
)

LN2 = math.log(2.0)
LN4 = math.log(4.0)
P_CLAMP = 0.5 - 1e-9
_DB_PER_NEPER = 10.0 / math.log(10.0)


class ConfigurationError(LibraError, ValueError):
    pass


def gap_to_db(delta_weight: float) -> float:
    return _DB_PER_NEPER * abs(delta_weight)


@dataclass(frozen=True)
class LibraConfig:
    ensemble_size: int = 20
    sigmas: Tuple[float, ...] = (LN2, LN4)
    gap_threshold_db: float = 20.0
    store_capacity: int = 30
    topology: str = "sequential"
    passes: int = 2
    master_seed: int = 0

    def __post_init__(self):
        if self.ensemble_size < 0:
            raise ConfigurationError("ensemble_size must be >= 0")
        if self.gap_threshold_db < 0:
            raise ConfigurationError("gap_threshold_db must be >= 0")
        if self.store_capacity < 0:
            raise ConfigurationError("store_capacity must be >= 0")
        if self.topology not in ("sequential", "tree"):
            raise ConfigurationError(f"unknown topology {self.topology!r}")
        if not self.sigmas or any(s < 0 for s in self.sigmas):
            raise ConfigurationError("sigmas must be a nonempty list of nonnegative values")
        if self.passes < 1:
            raise ConfigurationError("passes must be >= 1")

    def member_sigma(self, member: int) -> float:
        """Members are split into equal consecutive blocks, one per sigma."""
        return self.sigmas[member * len(self.sigmas) // max(self.ensemble_size, 1)]


def perturb_probabilities(model: ErrorModel, sigma: float, seed: int, member_index: int) -> Tuple[np.ndarray, int]:
    rng = np.random.default_rng([seed & (2**64 - 1), member_index, 0x4C42])
    factors = np.exp(rng.normal(0.0, sigma, size=len(model.edges))) if sigma > 0 else np.ones(len(model.edges))
    p = model.probabilities * factors
    clamped = int(np.count_nonzero(p > P_CLAMP))
    return np.minimum(p, P_CLAMP), clamped


def perturb_model(model: ErrorModel, sigma: float, seed: int, member_index: int) -> ErrorModel:
    """Copy of ``model`` with each probability scaled by an independent log-normal factor."""
    if sigma < 0:
        raise ConfigurationError("sigma must be >= 0")
    p, _ = perturb_probabilities(model, sigma, seed, member_index)
    return model.with_probabilities(p)


@dataclass(frozen=True)
class ComplementaryMatch:
    class0: MatcherResult
    class1: MatcherResult
    gap_db: float
    baseline: MatcherResult


def complementary_match(model: ErrorModel, syndrome, matcher: Optional[CorrelatedMatcher] = None) -> ComplementaryMatch:
    """Best matching found in each equivalence class and the weight gap between them.

    The opposite class is the lighter of a parity-constrained rematch and the
    baseline XOR each logical representative.
    """
    if not model.logical_representatives:
        raise ConfigurationError("complementary matching needs at least one logical representative")
    matcher = matcher or matcher_for(model)
    base, flipped = matcher.decode_pair(syndrome)
    best = flipped
    for rep in model.logical_representatives:
        w = base.weight + relative_weight(rep, base.config, model)
        if best is None or w < best.weight:
            cand = base.config ^ rep
            best = MatcherResult(cand, config_weight(cand, model), base.exact)
    lo, hi = (base, best) if base.weight <= best.weight else (best, base)
    return ComplementaryMatch(lo, hi, gap_to_db(hi.weight - lo.weight), base)


@dataclass
class LibraPrediction:
    predicted_observables_bestweight: int
    predicted_observables_degeneracy: int
    predicted_observables_global: int
    baseline_observables: int
    gap_db: float
    ensemble_invoked: bool
    diagnostics: Dict[str, object] = field(default_factory=dict)


class LibraDecoder:
    """Decoder bound to one model and configuration; the ensemble is built once."""

    def __init__(self, model: ErrorModel, cfg: LibraConfig = LibraConfig()):
        if model.num_observables != 1:
            raise ModelError("Libra decodes memory experiments with exactly one observable bit")
        if not model.logical_representatives:
            raise ConfigurationError("model has no logical representative")
        self.model = model
        self.cfg = cfg
        self.matcher = matcher_for(model)
        self._members: Optional[List[CorrelatedMatcher]] = None
        self.clamped = 0

    @property
    def members(self) -> List[CorrelatedMatcher]:
        if self._members is None:
            members = []
            for i in range(self.cfg.ensemble_size):
                p, clamped = perturb_probabilities(self.model, self.cfg.member_sigma(i), self.cfg.master_seed, i)
                self.clamped += clamped
                pm = self.model.with_probabilities(p)
                members.append(CorrelatedMatcher(pm, self.matcher.graph.for_model(pm)))
            self._members = members
        return self._members

    def decode(self, syndrome) -> LibraPrediction:
        cfg, model = self.cfg, self.model
        comp = complementary_match(model, syndrome, self.matcher)
        base_obs = observable_of(comp.baseline.config, model)
        invoked = comp.gap_db < cfg.gap_threshold_db
        if not invoked or cfg.ensemble_size == 0:
            return LibraPrediction(base_obs, base_obs, base_obs, base_obs, comp.gap_db, invoked,
                                   {"baseline_weight": comp.baseline.weight, "baseline_exact": comp.baseline.exact})

        results = [m.decode(syndrome).config for m in self.members]
        member_w = [config_weight(c, model) for c in results]
        g = min(range(len(results)), key=lambda i: (member_w[i], i))
        global_obs = observable_of(results[g], model)

        bases = [comp.class0.config, comp.class1.config]
        class_obs = [observable_of(b, model) for b in bases]
        result_obs = [observable_of(r, model) for r in results]
        stores = [PositiveCycleStore(cfg.store_capacity, b) for b in bases]
        improving = 0
        for _ in range(cfg.passes):
            for c in (0, 1):
                if cfg.topology == "sequential":
                    for m in results:
                        res = synthesize(bases[c], m, model, stores[c])
                        bases[c] = res.config
                        improving += len(res.applied)
                else:
                    # pairwise merges keep the left class, so move every leaf into class c first
                    shift = bases[c] ^ bases[1 - c]
                    leaves = [r if o == class_obs[c] else r ^ shift for r, o in zip(results, result_obs)]
                    bases[c], n = self._tree(bases[c], leaves, stores[c])
                    improving += n

        weights = [config_weight(b, model) for b in bases]
        obs = [observable_of(b, model) for b in bases]
        best = 0 if weights[0] <= weights[1] else 1
        logp = [-weights[c] + math.log(degeneracy_factor(stores[c], model)) for c in (0, 1)]
        degen = best
        if logp[1 - best] > logp[best]:
            degen = 1 - best
        diagnostics = {
            "baseline_weight": comp.baseline.weight,
            "baseline_exact": comp.baseline.exact,
            "class_weights": weights,
            "class_log_probabilities": logp,
            "global_weight": member_w[g],
            "improving_cycles": improving,
            "stored_cycles": [len(s) for s in stores],
        }
        return LibraPrediction(obs[best], obs[degen], global_obs, base_obs, comp.gap_db, True, diagnostics)

    def _tree(self, base: frozenset, results: Sequence[frozenset], store: PositiveCycleStore) -> Tuple[frozenset, int]:
        """Pairwise synthesis in a balanced binary tree; the class matching is the leftmost leaf."""
        model, cap = self.model, self.cfg.store_capacity
        level = [(base, store)] + [(r, PositiveCycleStore(cap, r)) for r in results]
        improving = 0
        while len(level) > 1:
            nxt = []
            for k in range(0, len(level) - 1, 2):
                (left, lstore), (right, rstore) = level[k], level[k + 1]
                res = synthesize(left, right, model, lstore)
                improving += len(res.applied)
                cfgn = res.config
                # fold the right subtree's stored cycles into the left store
                carried = [c for _, c in rstore.entries()]
                changed = True
                while changed:
                    changed = False
                    for c in carried:
                        if relative_weight(c, cfgn, model) < 0:
                            cfgn = cfgn ^ c
                            improving += 1
                            changed = True
                lstore.bind(cfgn)
                for c in carried:
                    r = relative_weight(c, cfgn, model)
                    if r >= 0:
                        lstore.offer(c, r)
                nxt.append((cfgn, lstore))
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return level[0][0], improving


def decode(model: ErrorModel, syndrome, cfg: LibraConfig = LibraConfig()) -> LibraPrediction:
    return LibraDecoder(model, cfg).decode(syndrome)
