import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cellinterf.moments import (
    DivergentMoment,
    MomentPair,
    analytic_moments,
    corr_coeff_variance,
    numeric_moments,
    offdiag_moments,
    truncated_moments,
)
from cellinterf.stochastic_net import ChannelParams, NetworkConfig

alphas = st.floats(min_value=2.05, max_value=6.0)
sigmas = st.floats(min_value=0.0, max_value=12.0)


def _net(r_max=None, eta=1.0):
    return NetworkConfig.from_cell_radius(150.0, eta, r_max=r_max)


@given(alphas, sigmas)
def test_truncated_tends_to_infinite_field(alpha, sigma):
    ch = ChannelParams(alpha, -72.3, sigma)
    full = analytic_moments(ch, _net())
    far = truncated_moments(ch, _net(), r_max=150.0 * 1e7)
    assert far.mean == pytest.approx(full.mean, rel=1e-6 + 1e7 ** (2 - alpha) * 2)
    assert far.variance == pytest.approx(full.variance, rel=1e-9)


@given(alphas, sigmas)
def test_truncation_only_removes_power(alpha, sigma):
    ch = ChannelParams(alpha, -72.3, sigma)
    full = analytic_moments(ch, _net())
    part = truncated_moments(ch, _net(), r_max=3000.0)
    assert part.mean < full.mean
    assert part.variance < full.variance


@given(alphas)
def test_shadowing_scaling(alpha):
    base = analytic_moments(ChannelParams(alpha, -72.3, 0.0), _net())
    shadowed = ChannelParams(alpha, -72.3, 6.0)
    m = analytic_moments(shadowed, _net())
    assert m.mean == pytest.approx(base.mean * shadowed.shadow_mean)
    assert m.variance == pytest.approx(base.variance * shadowed.shadow_second_moment)


def test_mean_divergence_at_alpha_two():
    with pytest.raises(DivergentMoment):
        analytic_moments(ChannelParams(2.0), _net())
    t = truncated_moments(ChannelParams(2.0), _net(), r_max=3000.0)
    assert math.isfinite(t.mean) and t.mean > 0


def test_mean_scales_with_density_and_cell_size():
    # mean ~ intensity * R_c**(2 - alpha), and R_c shrinks as the density grows
    ch = ChannelParams(4.0)
    a = NetworkConfig(1e-5, 1.0)
    b = NetworkConfig(1e-5, 2.0)
    ma, mb = analytic_moments(ch, a), analytic_moments(ch, b)
    ratio = (b.intensity / a.intensity) * (b.r_cell / a.r_cell) ** (2 - ch.alpha)
    assert mb.mean / ma.mean == pytest.approx(ratio)


def test_offdiag_is_half_the_power_variance():
    ch, net = ChannelParams(3.5, -72.3, 4.0), _net()
    mean, second = offdiag_moments(ch, net)
    assert mean == 0.0
    assert second == pytest.approx(0.5 * analytic_moments(ch, net).variance)


def test_corr_variance_closed_form():
    ch, net = ChannelParams(3.0, -72.3, 0.0), _net()
    # kappa = 1 / (4 pi lambda R_c^2) = 1 / pi on the reference cell
    assert corr_coeff_variance(ch, net) == pytest.approx(1.0 / (2.0 * math.pi))
    mean, second = offdiag_moments(ch, net)
    assert corr_coeff_variance(ch, net) == pytest.approx(second / analytic_moments(ch, net).mean ** 2)
    assert corr_coeff_variance(ChannelParams(2.0), net) == 0.0


def test_conditional_and_plain_estimators_agree():
    ch, net = ChannelParams(3.0, -72.3, 0.0), _net(r_max=1500.0)
    plain = numeric_moments(ch, net, 20_000, 4, method="sample")
    cond = numeric_moments(ch, net, 20_000, 4, method="conditional")
    th = truncated_moments(ch, net)
    assert plain.source == cond.source == "numeric"
    assert cond.mean == pytest.approx(th.mean, rel=0.02)
    assert cond.variance == pytest.approx(th.variance, rel=0.1)
    assert plain.mean == pytest.approx(th.mean, rel=0.03)
    with pytest.raises(ValueError):
        numeric_moments(ch, net, 10, 1, method="bootstrap")


def test_moment_pair_source_checked():
    with pytest.raises(ValueError):
        MomentPair(1.0, 1.0, source="guess")


def test_mean_only_skips_variance():
    m = analytic_moments(ChannelParams(3.0), _net(), mean_only=True)
    assert math.isnan(m.variance) and m.mean > 0
