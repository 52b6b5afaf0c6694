import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cellinterf.heavytail_dist import IGParams, IWParams, MixtureParams
from cellinterf.linkperf import (
    LinkConfig,
    RateCdf,
    capacity_ia,
    capacity_iu,
    capacity_limited,
    dominant_mode,
    lemma1_check,
    outage,
    rate_cdf,
    sample_rates,
)
from cellinterf.stochastic_net import ChannelParams, ConfigError, NetworkConfig, SectoredAntenna


def _complex(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _hermitian_psd(rng, n, k):
    a = _complex(rng, n, k, k)
    return a @ np.conj(np.swapaxes(a, 1, 2))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_dominant_mode_matches_svd(nr, nt, seed):
    h = _complex(np.random.default_rng(seed), 5, nr, nt)
    s, u, w = dominant_mode(h)
    ref = np.linalg.svd(h, compute_uv=False)[:, 0]
    np.testing.assert_allclose(s, ref, rtol=1e-8)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0)
    np.testing.assert_allclose(np.abs(np.einsum("nij,nj->ni", h, w)), np.abs(u) * s[:, None], atol=1e-9)


def test_dominant_mode_single_and_deterministic():
    h = _complex(np.random.default_rng(0), 3, 2)
    s1, u1, w1 = dominant_mode(h)
    s2, u2, w2 = dominant_mode(h.copy())
    assert s1 == s2 and np.array_equal(u1, u2) and np.array_equal(w1, w2)
    with pytest.raises(ValueError):
        dominant_mode(np.ones(3))


def test_ia_dominates_iu():
    rng = np.random.default_rng(1)
    h = _complex(rng, 500, 4, 4)
    sig = _hermitian_psd(rng, 500, 4)
    iu = capacity_iu(h, sig, 0.1, 1.0)
    ia = capacity_ia(h, sig, 0.1, 1.0)
    assert np.all(ia >= iu - 1e-12)


def test_iu_only_sees_projected_interference():
    rng = np.random.default_rng(2)
    h = _complex(rng, 200, 3, 3)
    sig = _hermitian_psd(rng, 200, 3)
    _, u, _ = dominant_mode(h)
    proj = np.einsum("ni,nij,nj->n", np.conj(u), sig, u).real
    # a diagonal covariance with the same projected power
    diag = np.zeros_like(sig)
    for k in range(3):
        diag[:, k, k] = proj
    np.testing.assert_allclose(capacity_iu(h, sig, 0.5, 2.0), capacity_iu(h, diag, 0.5, 2.0), rtol=1e-12)
    np.testing.assert_allclose(capacity_iu(h, sig, 0.5, 2.0), capacity_iu(h, proj, 0.5, 2.0), rtol=1e-12)


def test_ia_without_interference_is_iu():
    h = _complex(np.random.default_rng(3), 50, 2, 2)
    zero = np.zeros((50, 2, 2), dtype=complex)
    np.testing.assert_allclose(capacity_ia(h, zero, 0.3, 1.0), capacity_iu(h, zero, 0.3, 1.0), rtol=1e-10)


def test_capacity_input_checks():
    h = _complex(np.random.default_rng(4), 2, 2, 2)
    with pytest.raises(ValueError):
        capacity_ia(h, np.array([[[1, 1j], [1j, 1]]] * 2), 0.1, 1.0)
    with pytest.raises(ValueError):
        capacity_ia(h, np.array([[[1, 5], [5, 1]]] * 2, dtype=complex), 0.1, 1.0)
    with pytest.raises(ValueError):
        capacity_iu(h, np.zeros((2, 3, 3)), 0.1, 1.0)


def test_limited_capacity_formula():
    ch = ChannelParams(3.0)
    ant = SectoredAntenna(10.0, 0.1, math.pi / 6)
    r = capacity_limited(100.0, ch, ant, np.array([1.0]), np.array([0.0]), 1e-12, 1.0)
    assert r[0] == pytest.approx(math.log2(1 + 100.0 * ch.beta * 100.0**-3 / 1e-12))


def test_rate_cdf_properties():
    cdf = RateCdf.from_samples([3.0, 1.0, 2.0, 2.0])
    assert cdf.rates.tolist() == [1.0, 2.0, 2.0, 3.0]
    assert np.all(np.diff(cdf.cdf) >= 0) and cdf.cdf[-1] == 1.0
    assert outage(cdf, 0.0) == 0.0
    assert outage(cdf, 2.0) == 0.25
    assert cdf.outage(10.0) == 1.0
    text = cdf.to_csv()
    assert text.splitlines()[0] == "rate,cdf" and len(text.splitlines()) == 5
    assert len(cdf.to_csv(max_rows=2).splitlines()) == 3
    with pytest.raises(ValueError):
        RateCdf.from_samples([])


@pytest.fixture
def mimo():
    ch = ChannelParams(3.0, -72.3, 4.0)
    net = NetworkConfig.from_cell_radius(150.0, 1.0, r_max=1500.0, n_bs=2, n_ue=2)
    return ch, net


def test_simulated_ia_and_iu_share_draws(mimo):
    ch, net = mimo
    iu = sample_rates(LinkConfig(combining="IU"), ch, net, 2000, 7)
    ia = sample_rates(LinkConfig(combining="IA"), ch, net, 2000, 7)
    assert np.all(ia >= iu - 1e-12)
    assert np.mean(ia - iu) > 0


def test_model_link_config(mimo):
    ch, net = mimo
    model = MixtureParams(0.5, IGParams(4e-14, 1e-13), IWParams(3e-14, 2.5))
    with pytest.raises(ConfigError):
        LinkConfig(source="model")
    with pytest.raises(ConfigError):
        LinkConfig(source="model", model=model, combining="IA")
    ia = sample_rates(LinkConfig(source="model", model=model, combining="IA", diag_only_ia=True), ch, net, 1000, 1)
    iu = sample_rates(LinkConfig(source="model", model=model), ch, net, 1000, 1)
    assert ia.shape == iu.shape == (1000,)
    cdf = rate_cdf(LinkConfig(source="model", model=model), ch, net, 1000, 1)
    assert cdf.n == 1000


def test_limited_link(mimo):
    ch, net = mimo
    ant = SectoredAntenna(10.0, 0.1, math.pi / 6)
    r = sample_rates(LinkConfig(combining="limited"), ch, net, 1000, 3, ant=ant)
    assert np.all(r >= 0)
    with pytest.raises(ConfigError):
        sample_rates(LinkConfig(combining="limited"), ch, net, 10, 3)


def test_link_validation(mimo):
    ch, net = mimo
    with pytest.raises(ConfigError):
        LinkConfig(combining="MRC")
    with pytest.raises(ConfigError):
        sample_rates(LinkConfig(distance=5000.0), ch, net, 10, 1)
    with pytest.raises(ValueError):
        rate_cdf(LinkConfig(), ch, net, 10, 1)


def test_noise_power():
    assert LinkConfig(noise_dbm_hz=-124.0).noise_power == pytest.approx(10 ** (-15.4))


def test_lemma1_small_and_negative_control():
    ch = ChannelParams(3.0)
    net = NetworkConfig.from_cell_radius(150.0, 1.0, r_max=1500.0, n_bs=4)
    res = lemma1_check(ch, net, 4000, 2)
    assert res.ks < res.critical and res.passed
    bad = lemma1_check(ch, net, 4000, 2, combiner="interference")
    assert not bad.passed
    one = lemma1_check(ch, NetworkConfig.from_cell_radius(150.0, 1.0, r_max=1500.0), 500, 2)
    assert one.ks == 0.0
