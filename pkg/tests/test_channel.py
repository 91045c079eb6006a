import dataclasses

import numpy as np
import pytest

from hrisac.channel import (PropagationParams, bs_ris_channel, build_channels,
                            build_geometry, path_loss, ris_user_channels,
                            upa_steering)
from hrisac.config import ExperimentConfig

# Independent arbitrary-precision evaluation (mpmath, 40 digits), frozen.
PL_REFERENCE = 34336593041.077694321


def test_path_loss_matches_high_precision_reference():
    value = path_loss(0.2e12, 20.0, 0.01)
    assert value == pytest.approx(PL_REFERENCE, rel=1e-12)


def test_path_loss_unit_free_space_distance():
    f = 0.2e12
    d = 299792458.0 / (4.0 * np.pi * f)
    assert path_loss(f, d, 0.0) == pytest.approx(1.0, rel=1e-12)


def test_path_loss_inverse_square_without_absorption():
    base = path_loss(0.3e12, 7.0, 0.0)
    assert path_loss(0.3e12, 14.0, 0.0) == pytest.approx(4.0 * base, rel=1e-12)


def test_path_loss_domain_errors():
    with pytest.raises(ValueError):
        path_loss(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        path_loss(1e12, -1.0, 0.0)
    with pytest.raises(ValueError):
        path_loss(1e12, 1.0, -0.1)


def test_path_loss_monotone_in_every_argument():
    rng = np.random.default_rng(0)
    for _ in range(200):
        f = rng.uniform(0.05e12, 1e12)
        d = rng.uniform(0.5, 50.0)
        k = rng.uniform(0.0, 0.2)
        base = path_loss(f, d, k)
        assert path_loss(f * 1.01, d, k) > base
        assert path_loss(f, d * 1.01, k) > base
        assert path_loss(f, d, k + 0.01) > base


def test_steering_single_element_is_one():
    vec = upa_steering((1, 1), (0.7, -2.0))
    assert vec.shape == (1,)
    assert vec[0] == pytest.approx(1.0)


def test_steering_broadside_uniform():
    vec = upa_steering((3, 4), (0.0, 0.0))
    assert np.allclose(vec, 1.0 / np.sqrt(12))


def test_steering_hand_expanded_kronecker():
    # axis factors [1, e^{-j pi/2}] and [1, e^{-j pi}]
    vec = upa_steering((2, 2), (np.pi / 2, np.pi))
    expected = 0.5 * np.array([1.0, -1.0, -1.0j, 1.0j])
    assert np.allclose(vec, expected, atol=1e-15)


def test_steering_unit_norm_random_phases():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n1, n2 = rng.integers(1, 9, size=2)
        p1, p2 = rng.uniform(-np.pi, np.pi, size=2)
        vec = upa_steering((int(n1), int(n2)), (p1, p2))
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-12


@pytest.fixture
def geom_prop(desk_cfg):
    rng = np.random.default_rng(3)
    return build_geometry(desk_cfg, rng), PropagationParams.from_config(desk_cfg)


def test_bs_ris_channel_norm_identity(geom_prop):
    geom, prop = geom_prop
    h = bs_ris_channel(geom, prop)
    pl = path_loss(prop.frequency_hz, geom.bs_ris_distance_m,
                   prop.absorption_per_m)
    want = geom.num_ris * geom.num_bs / pl
    assert np.linalg.norm(h, "fro") ** 2 == pytest.approx(want, rel=1e-10)


def test_bs_ris_channel_rank_one(geom_prop):
    geom, prop = geom_prop
    h = bs_ris_channel(geom, prop)
    s = np.linalg.svd(h, compute_uv=False)
    assert s[1] < 1e-10 * s[0]


def test_bs_ris_channel_single_element_broadside():
    cfg = ExperimentConfig.desk(bs_rows=1, bs_cols=1, ris_rows=1, ris_cols=1,
                                sensing_rows=1, sensing_cols=1, num_active=0)
    geom = build_geometry(cfg, np.random.default_rng(0))
    prop = PropagationParams.from_config(cfg)
    h = bs_ris_channel(geom, prop)
    pl = path_loss(prop.frequency_hz, geom.bs_ris_distance_m,
                   prop.absorption_per_m)
    assert h.shape == (1, 1)
    assert abs(h[0, 0]) == pytest.approx(1.0 / np.sqrt(pl), rel=1e-12)


def test_user_rows_norm_identity(geom_prop):
    geom, prop = geom_prop
    g = ris_user_channels(geom, prop)
    assert g.shape == (geom.num_users + 1, geom.num_ris)
    for k in range(geom.num_users):
        pl = path_loss(prop.frequency_hz, float(geom.user_distances_m[k]),
                       prop.absorption_per_m)
        assert np.linalg.norm(g[k]) ** 2 == pytest.approx(
            geom.num_ris / pl, rel=1e-10)
    pl_t = path_loss(prop.frequency_hz, geom.target_distance_m,
                     prop.absorption_per_m)
    assert np.linalg.norm(g[-1]) ** 2 == pytest.approx(
        geom.num_ris / pl_t, rel=1e-10)


def test_identical_users_get_identical_rows(geom_prop):
    geom, prop = geom_prop
    same = dataclasses.replace(
        geom,
        user_azimuths=np.array([1.0, 1.0]),
        user_elevations=np.array([np.pi / 3, np.pi / 3]),
        user_distances_m=np.array([9.0, 9.0]))
    g = ris_user_channels(same, prop)
    assert np.array_equal(g[0], g[1])


def test_single_user_single_element_scalar():
    cfg = ExperimentConfig.desk(bs_rows=1, bs_cols=1, ris_rows=1, ris_cols=1,
                                sensing_rows=1, sensing_cols=1, num_users=1,
                                num_active=0)
    geom = build_geometry(cfg, np.random.default_rng(0))
    prop = PropagationParams.from_config(cfg)
    g = ris_user_channels(geom, prop)
    pl = path_loss(prop.frequency_hz, float(geom.user_distances_m[0]),
                   prop.absorption_per_m)
    assert abs(g[0, 0]) == pytest.approx(1.0 / np.sqrt(pl), rel=1e-12)


def test_channel_synthesis_is_pure(geom_prop):
    geom, prop = geom_prop
    first = build_channels(geom, prop)
    second = build_channels(geom, prop)
    assert np.array_equal(first.bs_ris, second.bs_ris)
    assert np.array_equal(first.ris_links, second.ris_links)
