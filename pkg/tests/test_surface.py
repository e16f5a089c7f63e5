from __future__ import annotations

import pytest

from libra.hypergraph import observable_of, syndrome_of
from libra.sampler import sample_shot
from libra.surface import SurfaceLayout, SurfaceParams, generate, plaquettes


def test_plaquette_counts():
    for d in (3, 5, 7):
        z, x = plaquettes(d)
        assert len(z) == len(x) == (d * d - 1) // 2


def test_detector_count_d3_r2():
    m = generate(SurfaceParams.from_p(3, 2))
    lay = SurfaceLayout.build(SurfaceParams.from_p(3, 2))
    assert lay.num_z_detectors == 12 and lay.num_x_detectors == 4
    assert m.num_detectors == 16


def test_single_round_has_no_x_detectors():
    params = SurfaceParams.from_p(3, 1)
    m = generate(params)
    lay = SurfaceLayout.build(params)
    assert lay.num_x_detectors == 0
    assert m.num_detectors == lay.num_z_detectors == 8
    # Z mechanisms have empty detector sets and are dropped; Y collapses onto its X part
    per_round_data = 9 * 2
    assert len(m.edges) == per_round_data + 4


def test_y_mechanisms_are_hyperedges():
    m = generate(SurfaceParams.from_p(3, 3))
    hyper = [e for e in m.edges if e.degree >= 3]
    assert hyper
    assert all(e.decomposition is not None for e in hyper)


def test_degree_bounds_and_decomposition_shape():
    m = generate(SurfaceParams.from_p(5, 4))
    for e in m.edges:
        assert 1 <= e.degree <= 4
        for dets, _ in e.components():
            assert len(dets) <= 2


def test_logical_representatives():
    for d in (3, 5):
        m = generate(SurfaceParams.from_p(d, 3))
        assert len(m.logical_representatives) >= d
        for rep in m.logical_representatives:
            assert syndrome_of(rep, m) == frozenset()
            assert observable_of(rep, m) == 0b1


def test_near_zero_noise_gives_empty_syndromes():
    m = generate(SurfaceParams(3, 3, 1e-12, 1e-12, 1e-12, 1e-12))
    assert all(not sample_shot(m, 5, k).syndrome for k in range(200))


def test_from_p_hierarchy():
    p = SurfaceParams.from_p(3, 2, 2e-3)
    assert (p.p_x, p.p_z, p.p_y, p.p_m) == pytest.approx((2e-4, 2e-4, 2e-4, 2e-3))
    q = SurfaceParams.from_p(3, 2, 2e-3, p_y=1e-3, p_x=None)
    assert q.p_y == 1e-3 and q.p_x == pytest.approx(2e-4)


@pytest.mark.parametrize("kw", [dict(distance=4), dict(distance=1), dict(rounds=0), dict(p_m=0.5), dict(p_x=0.0)])
def test_invalid_params(kw):
    base = dict(distance=3, rounds=2, p_x=1e-3, p_z=1e-3, p_y=1e-3, p_m=1e-3)
    base.update(kw)
    with pytest.raises(ValueError):
        SurfaceParams(**base)
