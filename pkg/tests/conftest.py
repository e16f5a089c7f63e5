from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from libra.hypergraph import ErrorModel, Hyperedge
from libra.surface import SurfaceParams

settings.register_profile("libra", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("libra")

# noise used by the statistical acceptance runs: Y-biased data errors plus measurement errors
ACCEPTANCE_NOISE = dict(p_x=0.0015, p_z=0.0015, p_y=0.0075, p_m=0.015)


def p_of_weight(w: float) -> float:
    return 1.0 / (1.0 + math.exp(w))


def surface(d: int, r: int, **noise) -> SurfaceParams:
    kw = dict(ACCEPTANCE_NOISE)
    kw.update(noise)
    return SurfaceParams(d, r, **kw)


@pytest.fixture
def t1() -> ErrorModel:
    """a: D0 (w 1), b: D0 D1 (w 2), c: D1 L0 (w 1.5); {a, b, c} is a logical operator."""
    edges = [
        Hyperedge((0,), p_of_weight(1.0)),
        Hyperedge((0, 1), p_of_weight(2.0)),
        Hyperedge((1,), p_of_weight(1.5), 1),
    ]
    return ErrorModel(2, 1, edges, (frozenset({0, 1, 2}),))


@pytest.fixture
def t3() -> ErrorModel:
    """a, a' on D0 (w 1, 2); b, b' on D2 (w 1, 2); indices a=0, a'=1, b=2, b'=3."""
    edges = [
        Hyperedge((0,), p_of_weight(1.0)),
        Hyperedge((0,), p_of_weight(2.0)),
        Hyperedge((2,), p_of_weight(1.0)),
        Hyperedge((2,), p_of_weight(2.0)),
    ]
    return ErrorModel(3, 1, edges)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "CRITERIA", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
