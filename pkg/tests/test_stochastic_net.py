import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cellinterf import moments
from cellinterf.stochastic_net import (
    BLOCK_SIZE,
    ChannelParams,
    ConfigError,
    NetworkConfig,
    SampleSet,
    SectoredAntenna,
    block_rng,
    dbm_to_watt,
    resolve_r_max,
    sample_correlation_coefficient,
    sample_correlation_complex,
    sample_interference_covariance,
    sample_interference_power_limited,
    sample_interference_power_rich,
    sample_limited_terms,
    sectored_gain_probabilities,
)


def test_unit_conversions():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)


def test_cell_radius_round_trip():
    net = NetworkConfig.from_cell_radius(150.0, 2.0)
    assert net.intensity * math.pi * 150.0**2 == pytest.approx(math.pi / 4)
    again = NetworkConfig(net.lambda1, net.eta)
    assert again.r_cell == pytest.approx(150.0)


@pytest.mark.parametrize(
    "kw",
    [
        dict(lambda1=-1.0),
        dict(lambda1=1e-5, eta=0.0),
        dict(lambda1=1e-5, r_max=10.0),
        dict(lambda1=1e-5, n_bs=0),
        dict(lambda1=1e-5, n_ue=1.5),
        dict(lambda1=0.0),
    ],
)
def test_network_validation(kw):
    with pytest.raises(ConfigError):
        NetworkConfig(**kw)


def test_channel_validation():
    with pytest.raises(ConfigError):
        ChannelParams(alpha=1.9)
    with pytest.raises(ConfigError):
        ChannelParams(sigma_sf_db=-1.0)


def test_shadow_moments():
    ch = ChannelParams(3.0, -72.3, 8.0)
    s = ch.shadow_log_std
    assert s == pytest.approx(8.0 * math.log(10) / 10)
    assert ch.shadow_mean == pytest.approx(math.exp(s * s / 2))
    assert ch.shadow_second_moment == pytest.approx(math.exp(2 * s * s))


def test_r_max_rules():
    net = NetworkConfig.from_cell_radius(150.0)
    with pytest.raises(ConfigError):
        resolve_r_max(ChannelParams(2.0), net)
    r4 = resolve_r_max(ChannelParams(4.0), net)
    assert r4 == pytest.approx(150.0 * 1e-3 ** (-0.5))
    # slow decay is capped by the expected point count
    r25 = resolve_r_max(ChannelParams(2.5), net)
    assert net.intensity * math.pi * (r25**2 - 150.0**2) == pytest.approx(1000.0)


def test_block_rng_is_independent_of_order():
    a = block_rng(7, 3).random(4)
    block_rng(7, 0).random(100)
    assert np.array_equal(a, block_rng(7, 3).random(4))
    assert not np.array_equal(a, block_rng(7, 4).random(4))


def test_determinism_across_workers(cell):
    ch, net = cell
    n = 3 * BLOCK_SIZE + 17
    one = sample_interference_power_rich(ch, net, n, 5, workers=1).values
    many = sample_interference_power_rich(ch, net, n, 5, workers=3).values
    assert one.tobytes() == many.tobytes()


def test_prefix_stability(cell):
    # the first blocks do not depend on how many realizations follow
    ch, net = cell
    short = sample_interference_power_rich(ch, net, BLOCK_SIZE, 5).values
    long = sample_interference_power_rich(ch, net, 2 * BLOCK_SIZE, 5).values
    assert np.array_equal(short, long[:BLOCK_SIZE])


def test_empty_field_gives_zero():
    ch = ChannelParams(3.0)
    net = NetworkConfig(0.0, 1.0, r_cell=150.0, r_max=300.0)
    s = sample_interference_power_rich(ch, net, 100, 1)
    assert np.all(s.values == 0.0)


def test_rich_mean_matches_closed_form(cell):
    ch, net = cell
    s = sample_interference_power_rich(ch, net, 40_000, 2)
    m = moments.truncated_moments(ch, net)
    assert np.mean(s.values) == pytest.approx(m.mean, rel=0.03)
    assert s.kind == "rich_power" and s.meta["r_max_used"] == 1500.0


def test_covariance_is_hermitian_psd(cell):
    ch, net0 = cell
    net = NetworkConfig(net0.lambda1, net0.eta, net0.r_cell, r_max=net0.r_max, n_bs=4)
    sig = sample_interference_covariance(ch, net, 3, n=200)
    assert sig.shape == (200, 4, 4)
    assert np.array_equal(sig, np.conj(np.swapaxes(sig, 1, 2)))
    assert np.all(np.linalg.eigvalsh(sig) > -1e-25)


def test_single_antenna_covariance_matches_rich(cell):
    ch, net = cell
    sig = sample_interference_covariance(ch, net, 9, n=1000)
    rich = sample_interference_power_rich(ch, net, 1000, 9).values
    np.testing.assert_allclose(sig[:, 0, 0].real, rich, rtol=1e-12)


def test_sample_normalized_correlation_is_bounded(cell):
    ch, net0 = cell
    net = NetworkConfig(net0.lambda1, net0.eta, net0.r_cell, r_max=net0.r_max, n_bs=2)
    c = sample_correlation_complex(ch, net, 2000, 4, normalization="sample")
    assert np.all(np.abs(c) <= 1.0 + 1e-12)
    s = sample_correlation_coefficient(ch, net, 2000, 4, normalization="sample")
    assert s.kind == "corr_coeff" and s.meta["normalization"] == "sample"
    np.testing.assert_array_equal(s.values, c.real)


def test_correlation_normalization_rejected(cell):
    ch, net = cell
    with pytest.raises(ValueError):
        sample_correlation_complex(ch, net, 10, 1, normalization="peak")


@given(
    st.floats(min_value=0.05, max_value=2 * math.pi),
    st.integers(min_value=1, max_value=6),
)
def test_gain_probabilities_sum_to_one(width, k):
    if k * width > 2 * math.pi:
        with pytest.raises(ConfigError):
            SectoredAntenna(10.0, 0.1, width, k)
        return
    p = sectored_gain_probabilities(SectoredAntenna(10.0, 0.1, width, k))
    assert sum(p) == pytest.approx(1.0)
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in p)


def test_limited_terms_mean(cell):
    ch, net = cell
    ant = SectoredAntenna(10.0, 0.1, math.pi / 6, 1)
    terms = sample_limited_terms(ch, net, ant, 60_000, 8)
    base = moments.truncated_moments(ch, net).mean
    probs = sectored_gain_probabilities(ant)
    expected = [g * p * base for g, p in zip(ant.composite_gains, probs)]
    np.testing.assert_allclose(terms.mean(axis=0), expected, rtol=0.1)
    total = sample_interference_power_limited(ch, net, ant, 60_000, 8)
    np.testing.assert_allclose(total.values, terms.sum(axis=1))
    assert total.kind == "limited_power"


def test_sampleset_validation():
    with pytest.raises(ValueError):
        SampleSet(np.array([1.0]), "weird")
    with pytest.raises(ValueError):
        SampleSet(np.array([-1.0]), "rich_power")
