import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from cellinterf.heavytail_dist import (
    IGParams,
    IWParams,
    MixtureParams,
    ig_cdf,
    ig_logpdf,
    ig_pdf,
    ig_sample,
    iw_cdf,
    iw_logpdf,
    iw_pdf,
    iw_quantile,
    iw_sample,
    mixture_cdf,
    mixture_draw,
    mixture_logpdf,
    mixture_pdf,
    mixture_sample,
)

pos = st.floats(min_value=1e-2, max_value=1e2)
shapes = st.floats(min_value=1.2, max_value=20.0)


@given(pos, pos, st.floats(min_value=1e-3, max_value=50.0))
def test_ig_matches_reference(mu, lam, t):
    ref = stats.invgauss(mu / lam, scale=lam)
    p = IGParams(mu, lam)
    assert ig_logpdf(t, p) == pytest.approx(ref.logpdf(t), rel=1e-9, abs=1e-9)
    assert ig_cdf(t, p) == pytest.approx(ref.cdf(t), rel=1e-8, abs=1e-12)


@given(pos, shapes, st.floats(min_value=1e-3, max_value=50.0))
def test_iw_matches_reference(b, c, t):
    ref = stats.invweibull(c, scale=b)
    p = IWParams(b, c)
    lref = ref.logpdf(t)
    if np.isfinite(lref):  # the reference underflows deep in the left tail
        assert iw_logpdf(t, p) == pytest.approx(lref, rel=1e-9, abs=1e-9)
    else:
        assert iw_logpdf(t, p) < -700
    assert iw_cdf(t, p) == pytest.approx(ref.cdf(t), rel=1e-9, abs=1e-14)


def test_ig_cdf_far_tail_is_finite():
    # the exp(2 lam / mu) factor overflows without the log-domain form
    p = IGParams(1.0, 2000.0)
    v = ig_cdf(np.array([0.5, 1.0, 2.0]), p)
    assert np.all(np.isfinite(v)) and np.all(np.diff(v) > 0)


def test_pdfs_integrate_to_one():
    for pdf in (
        lambda t: ig_pdf(t, IGParams(2.0, 3.0)),
        lambda t: iw_pdf(t, IWParams(1.0, 2.5)),
        lambda t: mixture_pdf(t, MixtureParams(0.3, IGParams(2.0, 3.0), IWParams(1.0, 2.5))),
    ):
        total, _ = integrate.quad(pdf, 0.0, np.inf, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)


def test_non_positive_support():
    t = np.array([-1.0, 0.0])
    assert np.all(ig_logpdf(t, IGParams(1, 1)) == -np.inf)
    assert np.all(iw_pdf(t, IWParams(1, 3)) == 0.0)
    assert np.all(mixture_cdf(t, MixtureParams(0.5, IGParams(1, 1), IWParams(1, 3))) == 0.0)


def test_iw_moments():
    p = IWParams(1.0, 3.0)
    ref = stats.invweibull(3.0)
    assert p.mean == pytest.approx(ref.mean())
    assert p.variance == pytest.approx(ref.var())
    assert IWParams(1.0, 0.9).mean == math.inf
    assert IWParams(1.0, 1.5).variance == math.inf


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=1e-3, max_value=20.0))
def test_mixture_is_convex_combination(w1, t):
    ig, iw = IGParams(1.5, 2.0), IWParams(0.8, 2.7)
    p = MixtureParams(w1, ig, iw)
    assert mixture_pdf(t, p) == pytest.approx(w1 * ig_pdf(t, ig) + (1 - w1) * iw_pdf(t, iw), rel=1e-10, abs=1e-300)
    assert mixture_cdf(t, p) == pytest.approx(w1 * ig_cdf(t, ig) + (1 - w1) * iw_cdf(t, iw), rel=1e-10, abs=1e-300)


def test_mixture_corners_are_exact():
    ig, iw = IGParams(1.5, 2.0), IWParams(0.8, 2.7)
    t = np.geomspace(1e-3, 1e3, 50)
    assert np.array_equal(mixture_logpdf(t, MixtureParams(1.0, ig, iw)), ig_logpdf(t, ig))
    assert np.array_equal(mixture_logpdf(t, MixtureParams.single(iw)), iw_logpdf(t, iw))
    assert np.array_equal(mixture_cdf(t, MixtureParams.single(ig)), ig_cdf(t, ig))


def test_mixture_params_validation():
    with pytest.raises(ValueError):
        MixtureParams(1.2, IGParams(1, 1), IWParams(1, 3))
    with pytest.raises(ValueError):
        MixtureParams(0.5, None, IWParams(1, 3))
    with pytest.raises(ValueError):
        IGParams(-1.0, 1.0)
    with pytest.raises(ValueError):
        IWParams(1.0, math.inf)
    p = MixtureParams(0.25, IGParams(1, 2), IWParams(3, 4))
    assert MixtureParams.from_dict(p.as_dict()) == p
    assert p.mean == pytest.approx(0.25 * 1 + 0.75 * IWParams(3, 4).mean)


def test_iw_quantile_inverts_cdf():
    p = IWParams(2.0, 3.5)
    u = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(iw_cdf(iw_quantile(u, p), p), u, rtol=1e-12)


@pytest.mark.parametrize(
    "draw, cdf",
    [
        (lambda: ig_sample(IGParams(1.0, 0.3), 20_000, 1), lambda t: ig_cdf(t, IGParams(1.0, 0.3))),
        (lambda: iw_sample(IWParams(1.0, 2.2), 20_000, 2), lambda t: iw_cdf(t, IWParams(1.0, 2.2))),
        (
            lambda: mixture_sample(MixtureParams(0.4, IGParams(1.0, 5.0), IWParams(0.5, 3.0)), 20_000, 3),
            lambda t: mixture_cdf(t, MixtureParams(0.4, IGParams(1.0, 5.0), IWParams(0.5, 3.0))),
        ),
    ],
)
def test_samplers_pass_ks(draw, cdf):
    s = draw()
    assert s.kind == "model_power"
    assert stats.kstest(s.values, cdf).pvalue > 1e-3


def test_samplers_are_deterministic():
    a = mixture_sample(MixtureParams(0.4, IGParams(1, 5), IWParams(0.5, 3)), 1000, 9)
    b = mixture_sample(MixtureParams(0.4, IGParams(1, 5), IWParams(0.5, 3)), 1000, 9)
    assert np.array_equal(a.values, b.values)
    assert 0.3 < a.meta["ig_fraction"] < 0.5


def test_ig_sampler_extreme_shape():
    # very small mu/lam: the naive root loses all precision
    s = ig_sample(IGParams(1e-3, 1e3), 5000, 4).values
    assert np.all(s > 0)
    assert np.mean(s) == pytest.approx(1e-3, rel=0.01)


def test_mixture_draw_labels():
    rng = np.random.default_rng(0)
    y, lab = mixture_draw(rng, 5000, MixtureParams(0.7, IGParams(1, 5), IWParams(0.5, 3)), return_labels=True)
    assert y.shape == lab.shape == (5000,)
    assert abs(np.mean(lab == 0) - 0.7) < 0.03
