"""First and second moments of the interference power and correlation.

Closed forms come from Campbell's theorem for a PPP of intensity
``net.intensity`` outside the cell radius. The truncated variants integrate
the same integrands over ``[r_cell, r_max]`` so they can be compared with the
simulator without truncation bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stochastic_net import (
    ChannelParams,
    NetworkConfig,
    resolve_r_max,
    sample_interference_power_rich,
    sample_path_gain_sums,
)


class DivergentMoment(ArithmeticError):
    """Requested moment is infinite for this path-loss exponent."""


@dataclass(frozen=True)
class MomentPair:
    mean: float
    variance: float
    source: str = "analytic"

    def __post_init__(self):
        if self.source not in ("analytic", "numeric"):
            raise ValueError(f"unknown moment source {self.source!r}")


def mean_coefficient(ch: ChannelParams, net: NetworkConfig) -> float:
    """2 pi lambda beta E[L_s] / (alpha - 2); multiplies P * R_c**(2 - alpha)."""
    if ch.alpha <= 2.0:
        raise DivergentMoment(f"mean interference is infinite for alpha={ch.alpha}")
    return 2.0 * math.pi * net.intensity * ch.beta * ch.shadow_mean / (ch.alpha - 2.0)


def variance_coefficient(ch: ChannelParams, net: NetworkConfig) -> float:
    """pi lambda beta^2 E[L_s^2] / (2 (alpha - 1))."""
    if ch.alpha <= 1.0:
        raise DivergentMoment(f"interference variance is infinite for alpha={ch.alpha}")
    return math.pi * net.intensity * ch.beta**2 * ch.shadow_second_moment / (2.0 * (ch.alpha - 1.0))


def analytic_moments(ch: ChannelParams, net: NetworkConfig, mean_only: bool = False) -> MomentPair:
    """Infinite-field mean and variance of the per-antenna interference power.

    With ``mean_only`` the variance is not computed and is reported as NaN.
    """
    p = net.p_tx
    rc = net.r_cell
    mean = mean_coefficient(ch, net) * p * rc ** (2.0 - ch.alpha)
    if mean_only:
        return MomentPair(mean, math.nan)
    var = 2.0 * variance_coefficient(ch, net) * (2.0 * p * p) * rc ** (2.0 * (1.0 - ch.alpha))
    return MomentPair(mean, var)


def _power_integral(exponent: float, lo: float, hi: float) -> float:
    # integral of r**exponent over [lo, hi]
    if abs(exponent + 1.0) < 1e-12:
        return math.log(hi / lo)
    k = exponent + 1.0
    return (hi**k - lo**k) / k


def truncated_moments(ch: ChannelParams, net: NetworkConfig, r_max: float | None = None) -> MomentPair:
    """Mean and variance for interferers restricted to ``[r_cell, r_max]``.

    Finite for every alpha >= 2. ``r_max`` defaults to the simulator's radius.
    """
    if r_max is None:
        r_max = resolve_r_max(ch, net)
    rc, p = net.r_cell, net.p_tx
    lam = net.intensity
    mean = 2.0 * math.pi * lam * ch.beta * ch.shadow_mean * p * _power_integral(1.0 - ch.alpha, rc, r_max)
    # E[(L g)^2] = 2 E[L^2] for unit-mean exponential g
    var = (
        2.0 * math.pi * lam * ch.beta**2 * 2.0 * ch.shadow_second_moment * p * p
        * _power_integral(1.0 - 2.0 * ch.alpha, rc, r_max)
    )
    return MomentPair(mean, var)


def offdiag_moments(ch: ChannelParams, net: NetworkConfig) -> tuple[float, float]:
    """(mean, E|q~0|^2) of an off-diagonal covariance entry."""
    return 0.0, 0.5 * analytic_moments(ch, net).variance


def corr_coeff_variance(ch: ChannelParams, net: NetworkConfig) -> float:
    """E|C_xy|^2 for the correlation coefficient q~0 / E[q0].

    Equals kappa (alpha-2)^2 exp(sigma^2/zeta^2) / (alpha-1) with
    kappa = 1 / (4 pi lambda R_c^2); zero at alpha == 2.
    """
    if ch.alpha <= 1.0:
        raise DivergentMoment("alpha must exceed 1")
    p = net.p_tx
    kappa = (2.0 * p * p) / (8.0 * math.pi * net.intensity * p * p * net.r_cell**2)
    return kappa * (ch.alpha - 2.0) ** 2 * math.exp(ch.shadow_log_std**2) / (ch.alpha - 1.0)


def numeric_moments(
    ch: ChannelParams,
    net: NetworkConfig,
    n: int,
    seed: int,
    workers: int | None = None,
    method: str = "sample",
) -> MomentPair:
    """Monte-Carlo mean and variance from ``n`` simulated realizations.

    ``method="sample"`` returns the plain sample mean and unbiased sample
    variance of simulated powers. ``method="conditional"`` simulates only the
    interferer positions and integrates shadowing and fading per realization,
    then combines via the law of total variance::

        E[q]   = mean_k E[q | field_k]
        var[q] = mean_k var[q | field_k] + var_k E[q | field_k]

    The conditional estimator is unbiased for the same quantities and its
    error does not blow up with the shadowing kurtosis, which makes it the
    usable oracle above a few dB of shadowing.
    """
    if method == "sample":
        samples = sample_interference_power_rich(ch, net, n, seed, workers).values
        return MomentPair(float(np.mean(samples)), float(np.var(samples, ddof=1)), source="numeric")
    if method != "conditional":
        raise ValueError(f"unknown method {method!r}")
    sums = sample_path_gain_sums(ch, net, n, seed, workers)
    p = net.p_tx
    cond_mean = p * ch.shadow_mean * sums[:, 0]
    # var(L g) = 2 E[L^2] - E[L]^2 for unit-mean exponential g
    cond_var = p * p * (2.0 * ch.shadow_second_moment - ch.shadow_mean**2) * sums[:, 1]
    mean = float(np.mean(cond_mean))
    var = float(np.mean(cond_var) + np.var(cond_mean, ddof=1))
    return MomentPair(mean, var, source="numeric")
