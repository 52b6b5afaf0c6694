"""Goodness of fit: kernel density on the log axis, KL divergence, KS distance.

Interference power spans several decades, so the reference density is a
Gaussian-kernel estimate of ``x = log10(y)`` and is mapped back to the power
axis with the Jacobian ``1 / (y ln 10)``. The KL estimate averages
``log p_hat(y_i) - log q(y_i)`` over the reference sample, with ``p_hat``
evaluated leave-one-out so a sample never scores its own kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .stochastic_net import SampleSet

_LN10 = math.log(10.0)
_GRID_SIZE = 1 << 14
_MIN_KDE_SAMPLES = 100


def silverman_bandwidth(x: np.ndarray) -> float:
    """0.9 * min(std, IQR / 1.34) * n**(-1/5)."""
    n = len(x)
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    if not spread > 0:
        raise ValueError("bandwidth undefined for data without spread")
    return float(0.9 * spread * n ** (-0.2))


@dataclass
class DensityEstimate:
    """Kernel density of ``log10`` samples on a uniform grid."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    n: int

    def log10_density(self, x):
        """Density of ``log10(Y)`` at ``x``, linear interpolation on the grid."""
        return np.interp(x, self.grid, self.density, left=0.0, right=0.0)

    def pdf(self, y):
        """Density of ``Y`` itself (Jacobian applied)."""
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = self.log10_density(np.log10(y[pos])) / (y[pos] * _LN10)
        return out

    def mass(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def _as_positive(samples) -> np.ndarray:
    y = np.asarray(samples.values if isinstance(samples, SampleSet) else samples, dtype=float)
    if y.ndim != 1 or len(y) == 0:
        raise ValueError("need a non-empty 1-D sample")
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise ValueError("samples must be finite and strictly positive")
    return y


def _binned_kde(x: np.ndarray, h: float, m: int = _GRID_SIZE):
    # linear binning then FFT convolution with the Gaussian kernel
    lo, hi = float(x.min()) - 5.0 * h, float(x.max()) + 5.0 * h
    grid = np.linspace(lo, hi, m)
    step = grid[1] - grid[0]
    pos = (x - lo) / step
    left = np.clip(np.floor(pos).astype(int), 0, m - 2)
    frac = pos - left
    counts = np.bincount(left, weights=1.0 - frac, minlength=m) + np.bincount(
        left + 1, weights=frac, minlength=m
    )
    # kernel on a zero-padded circular grid, wide enough to avoid wrap-around
    size = 2 * m
    offs = np.arange(size)
    offs = np.where(offs < m, offs, offs - size) * step
    kernel = np.exp(-0.5 * (offs / h) ** 2) / (h * math.sqrt(2.0 * math.pi))
    dens = np.fft.irfft(np.fft.rfft(counts, size) * np.fft.rfft(kernel), size)[:m]
    dens = np.maximum(dens, 0.0) / len(x)
    return grid, dens


def kde_fit(samples, bandwidth: float | None = None) -> DensityEstimate:
    """Gaussian KDE of ``log10(samples)`` with Silverman's bandwidth by default."""
    y = _as_positive(samples)
    if len(y) < _MIN_KDE_SAMPLES:
        raise ValueError(f"kde_fit needs at least {_MIN_KDE_SAMPLES} samples, got {len(y)}")
    x = np.log10(y)
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    grid, dens = _binned_kde(x, h)
    return DensityEstimate(grid, dens, h, len(y))


@dataclass(frozen=True)
class KLScore:
    value: float  # clipped at zero
    raw: float
    n: int
    bandwidth: float

    def __float__(self):
        return self.value


def kl_score(ref, model_logpdf, bandwidth: float | None = None) -> KLScore:
    """KL divergence D(ref || model) with the diagnostics kept.

    ``model_logpdf`` maps power values to log-densities on the power axis.
    A sample where the model density is zero gives ``+inf``.
    """
    y = _as_positive(ref)
    n = len(y)
    if n < _MIN_KDE_SAMPLES:
        raise ValueError(f"KL estimate needs at least {_MIN_KDE_SAMPLES} samples, got {n}")
    est = kde_fit(y, bandwidth)
    x = np.log10(y)
    full = est.log10_density(x)
    self_term = 1.0 / (n * est.bandwidth * math.sqrt(2.0 * math.pi))
    loo = (full - self_term) * n / (n - 1)
    # binning can leave isolated points a hair below zero after removing self
    floor = 1e-300
    log_p = np.log(np.maximum(loo, floor)) - x * _LN10 - math.log(_LN10)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_q = np.asarray(model_logpdf(y), dtype=float)
    if np.any(np.isnan(log_q)):
        raise ValueError("model log-density returned NaN")
    if np.any(log_q == -np.inf):
        return KLScore(math.inf, math.inf, n, est.bandwidth)
    raw = float(np.mean(log_p - log_q))
    return KLScore(max(raw, 0.0), raw, n, est.bandwidth)


def kl_divergence(ref, model_logpdf, bandwidth: float | None = None) -> float:
    """Nonnegative KL divergence D(ref || model); see :func:`kl_score`."""
    return kl_score(ref, model_logpdf, bandwidth).value


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    va = np.asarray(a.values if isinstance(a, SampleSet) else a, dtype=float)
    vb = np.asarray(b.values if isinstance(b, SampleSet) else b, dtype=float)
    if len(va) == 0 or len(vb) == 0:
        raise ValueError("both samples must be non-empty")
    return float(stats.ks_2samp(va, vb).statistic)


def ks_critical(n: int, m: int, level: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value at significance ``level``."""
    return math.sqrt(-0.5 * math.log(level / 2.0)) * math.sqrt((n + m) / (n * m))
