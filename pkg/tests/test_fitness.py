import math

import numpy as np
import pytest
from scipy import stats

from cellinterf.fitness import (
    kde_fit,
    kl_divergence,
    kl_score,
    ks_critical,
    ks_distance,
    silverman_bandwidth,
)
from cellinterf.heavytail_dist import IGParams, ig_logpdf, ig_pdf


def test_silverman_on_standard_normal():
    x = np.random.default_rng(0).standard_normal(10_000)
    assert silverman_bandwidth(x) == pytest.approx(0.9 * 10_000 ** (-0.2), rel=0.05)
    with pytest.raises(ValueError):
        silverman_bandwidth(np.ones(50))


def test_kde_mass_and_accuracy():
    p = IGParams(1.0, 2.0)
    y = stats.invgauss(0.5, scale=2.0).rvs(50_000, random_state=3)
    est = kde_fit(y)
    assert est.mass() == pytest.approx(1.0, abs=1e-3)
    t = np.geomspace(0.2, 3.0, 40)
    np.testing.assert_allclose(est.pdf(t), ig_pdf(t, p), rtol=0.08)
    assert est.pdf(np.array([-1.0, 0.0])).tolist() == [0.0, 0.0]


def test_kde_matches_direct_sum():
    x = np.random.default_rng(1).standard_normal(300)
    y = 10.0**x
    est = kde_fit(y, bandwidth=0.3)
    pts = np.linspace(-2, 2, 9)
    direct = stats.norm.pdf((pts[:, None] - x[None, :]) / 0.3).mean(axis=1) / 0.3
    np.testing.assert_allclose(est.log10_density(pts), direct, rtol=1e-3, atol=1e-6)


def test_kl_between_lognormals():
    # D(N(0,1) || N(1,1)) = 0.5 on the natural-log axis, invariant to the axis map
    rng = np.random.default_rng(2)
    y = np.exp(rng.standard_normal(100_000))
    q = stats.lognorm(1.0, scale=math.e)
    assert kl_divergence(y, q.logpdf) == pytest.approx(0.5, abs=0.03)


def test_kl_of_true_model_is_small_and_clipped():
    y = stats.invgauss(0.5, scale=2.0).rvs(50_000, random_state=4)
    score = kl_score(y, lambda t: ig_logpdf(t, IGParams(1.0, 2.0)))
    assert abs(score.raw) < 0.02
    assert score.value == max(score.raw, 0.0)
    assert float(score) == score.value


def test_kl_infinite_when_model_excludes_data():
    y = np.geomspace(0.1, 10.0, 500)
    model = lambda t: np.where(t < 5.0, 0.0, -np.inf)  # noqa: E731
    assert kl_divergence(y, model) == math.inf
    with pytest.raises(ValueError):
        kl_divergence(y, lambda t: np.full_like(t, np.nan))


def test_kl_needs_enough_samples():
    with pytest.raises(ValueError):
        kl_divergence(np.linspace(1, 2, 50), lambda t: np.zeros_like(t))
    with pytest.raises(ValueError):
        kde_fit(np.array([1.0, -1.0] * 100))


def test_ks_helpers():
    a = np.arange(100.0)
    assert ks_distance(a, a) == 0.0
    assert ks_distance(a, a + 1000) == 1.0
    assert ks_critical(1000, 1000, 0.05) == pytest.approx(1.358 * math.sqrt(2 / 1000), rel=1e-3)
    with pytest.raises(ValueError):
        ks_distance([], a)


def test_kde_ig_sup_error():
    y = stats.invgauss(1.0, scale=1.0).rvs(100_000, random_state=5)
    t = np.geomspace(0.05, 5.0, 200)
    true = ig_pdf(t, IGParams(1.0, 1.0))
    assert np.max(np.abs(kde_fit(y).pdf(t) - true)) < 0.05 * np.max(true)


def test_kde_is_shift_equivariant_on_log_axis():
    y = np.exp(np.random.default_rng(6).standard_normal(2000))
    a, b = kde_fit(y), kde_fit(y * 10.0)
    assert b.bandwidth == pytest.approx(a.bandwidth)
    x = np.linspace(-1.0, 1.0, 11)
    np.testing.assert_allclose(b.log10_density(x + 1.0), a.log10_density(x), rtol=1e-6, atol=1e-9)
