"""Logical error rates, improvement ratios and error-suppression ratios."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .hypergraph import LibraError


class InvalidInputError(LibraError, ValueError):
    pass


def logical_error_rate(n_failures: int, n_shots: int, rounds: int) -> float:
    """Per-round rate from the shot failure fraction, assuming independent rounds."""
    if n_shots <= 0:
        raise InvalidInputError("need at least one shot")
    if rounds < 1:
        raise InvalidInputError("rounds must be >= 1")
    if not 0 <= n_failures <= n_shots:
        raise InvalidInputError("failure count must lie in [0, shots]")
    x = n_failures / n_shots
    if x > 0.5:
        warnings.warn(f"failure fraction {x:.3f} exceeds 1/2; clamping the rate to 0.5", RuntimeWarning)
        return 0.5
    return 0.5 * (1.0 - (1.0 - 2.0 * x) ** (1.0 / rounds))


def logical_error_rate_sigma(n_failures: int, n_shots: int, rounds: int) -> float:
    """Binomial standard error of ``logical_error_rate`` (delta method)."""
    x = n_failures / n_shots
    if x >= 0.5:
        return math.inf
    sx = math.sqrt(x * (1.0 - x) / n_shots)
    return sx * (1.0 - 2.0 * x) ** (1.0 / rounds - 1.0) / rounds


@dataclass(frozen=True)
class Ratio:
    value: float
    sigma: float
    # True when the decoder had no failures and ``value`` is only a lower bound
    lower_bound: bool = False


def improvement_ratio(eps_baseline: float, eps_decoder: float) -> float:
    if eps_decoder <= 0:
        raise InvalidInputError("decoder rate must be positive; use improvement_from_counts for zero failures")
    return eps_baseline / eps_decoder


def improvement_from_counts(base_failures: int, dec_failures: int, n_shots: int, rounds: int) -> Ratio:
    """Improvement ratio with its binomial error.

    Zero decoder failures give a flagged lower bound computed with one failure
    substituted; with no baseline failures either the ratio is undefined (nan).
    """
    eb = logical_error_rate(base_failures, n_shots, rounds)
    flagged = dec_failures == 0
    if base_failures == 0:
        return Ratio(math.nan, math.nan, flagged)
    nf = 1 if flagged else dec_failures
    ed = logical_error_rate(nf, n_shots, rounds)
    value = eb / ed
    rel = 0.0
    if base_failures:
        rel += (logical_error_rate_sigma(base_failures, n_shots, rounds) / eb) ** 2
    rel += (logical_error_rate_sigma(nf, n_shots, rounds) / ed) ** 2
    return Ratio(value, value * math.sqrt(rel), flagged)


def suppression_ratio(eps_small: float, eps_large: float, d_small: int, d_large: int) -> float:
    """Error-suppression factor per distance step of two."""
    if eps_small <= 0 or eps_large <= 0:
        raise InvalidInputError("rates must be positive")
    if d_large <= d_small:
        raise InvalidInputError("d_large must exceed d_small")
    return (eps_small / eps_large) ** (2.0 / (d_large - d_small))


def binomial_z(n_a: int, n_b: int, n_shots: int) -> float:
    """z-score of ``n_a - n_b`` for two independent binomial counts over the same shot count."""
    pa, pb = n_a / n_shots, n_b / n_shots
    var = (pa * (1 - pa) + pb * (1 - pb)) / n_shots
    if var == 0:
        return 0.0
    return (pa - pb) / math.sqrt(var)


def invocation_z(k_a: int, n_a: int, k_b: int, n_b: int) -> Optional[float]:
    """z-score that fraction ``k_a/n_a`` exceeds ``k_b/n_b``."""
    pa, pb = k_a / n_a, k_b / n_b
    var = pa * (1 - pa) / n_a + pb * (1 - pb) / n_b
    if var == 0:
        return None
    return (pa - pb) / math.sqrt(var)
