"""Ensemble decoding of hypergraph error models with matching synthesis."""
from __future__ import annotations

from .decoder import (
    ComplementaryMatch,
    ConfigurationError,
    LibraConfig,
    LibraDecoder,
    LibraPrediction,
    complementary_match,
    decode,
    perturb_model,
)
from .dem import DemSyntaxError, load_model, parse_model, save_model, serialize_model
from .hypergraph import (
    DecompositionError,
    ErrorModel,
    Hyperedge,
    InvalidProbabilityError,
    LibraError,
    ModelError,
    config_weight,
    config_xor,
    observable_of,
    syndrome_of,
    weight_from_probability,
)
from .matcher import CorrelatedMatcher, InfeasibleSyndromeError, MatcherResult, correlated_decode, decompose
from .oracle import OracleOverflowError, exact_mwhpm, milp_mwhpm
from .sampler import ShotRecord, sample_shot, sample_shots
from .stats import improvement_ratio, logical_error_rate, suppression_ratio
from .surface import SurfaceParams, generate
from .synthesis import PositiveCycleStore, degeneracy_factor, relative_weight, split_null_components, synthesize

__all__ = [name for name in dir() if not name.startswith("_")]
