"""Inverse Gaussian, inverse Weibull and their two-component mixture.

All densities are evaluated in the log domain first; interference samples
span many decades and the plain densities under- or overflow long before the
log-densities do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .specfun import digamma, gamma, lgamma  # noqa: F401  (re-exported)
from .stochastic_net import SampleSet

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class IGParams:
    """Inverse Gaussian with mean ``mu`` and shape ``lam``."""

    mu: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0 and math.isfinite(self.mu) and math.isfinite(self.lam)):
            raise ValueError(f"IG parameters must be finite and > 0, got mu={self.mu}, lam={self.lam}")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.mu**3 / self.lam


@dataclass(frozen=True)
class IWParams:
    """Inverse Weibull (Frechet) with scale ``b`` and shape ``c``."""

    b: float
    c: float

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0 and math.isfinite(self.b) and math.isfinite(self.c)):
            raise ValueError(f"IW parameters must be finite and > 0, got b={self.b}, c={self.c}")

    @property
    def mean(self) -> float:
        if self.c <= 1.0:
            return math.inf
        return self.b * gamma(1.0 - 1.0 / self.c)

    @property
    def variance(self) -> float:
        if self.c <= 2.0:
            return math.inf
        g1 = gamma(1.0 - 1.0 / self.c)
        return self.b**2 * (gamma(1.0 - 2.0 / self.c) - g1 * g1)


@dataclass(frozen=True)
class MixtureParams:
    """``w1 * IG + (1 - w1) * IW``; the corners w1 in {0, 1} are the single models.

    A component whose weight is exactly zero may be ``None``.
    """

    w1: float
    ig: IGParams | None
    iw: IWParams | None

    def __post_init__(self):
        if not 0.0 <= self.w1 <= 1.0:
            raise ValueError(f"w1 must lie in [0, 1], got {self.w1}")
        if self.ig is None and self.w1 > 0.0:
            raise ValueError("IG component required when w1 > 0")
        if self.iw is None and self.w1 < 1.0:
            raise ValueError("IW component required when w1 < 1")

    @property
    def w2(self) -> float:
        return 1.0 - self.w1

    @property
    def mean(self) -> float:
        if self.w2 == 0.0:
            return self.ig.mean
        if self.w1 == 0.0:
            return self.iw.mean
        return self.w1 * self.ig.mean + self.w2 * self.iw.mean

    def as_dict(self) -> dict:
        return {
            "w1": self.w1,
            "ig": None if self.ig is None else {"mu": self.ig.mu, "lam": self.ig.lam},
            "iw": None if self.iw is None else {"b": self.iw.b, "c": self.iw.c},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureParams":
        ig = None if d.get("ig") is None else IGParams(float(d["ig"]["mu"]), float(d["ig"]["lam"]))
        iw = None if d.get("iw") is None else IWParams(float(d["iw"]["b"]), float(d["iw"]["c"]))
        return cls(float(d["w1"]), ig, iw)

    @classmethod
    def single(cls, component: "IGParams | IWParams") -> "MixtureParams":
        if isinstance(component, IGParams):
            return cls(1.0, component, None)
        return cls(0.0, None, component)


def _positive_part(t):
    t = np.asarray(t, dtype=float)
    pos = t > 0
    safe = np.where(pos, t, 1.0)
    return t, pos, safe


def _finish(out, pos, fill, scalar):
    out = np.where(pos, out, fill)
    return float(out) if scalar else out


def ig_logpdf(t, p: IGParams):
    scalar = np.ndim(t) == 0
    t, pos, s = _positive_part(t)
    with np.errstate(over="ignore"):
        quad = p.lam * (s - p.mu) ** 2 / (2.0 * p.mu**2 * s)
        out = 0.5 * (math.log(p.lam) - _LOG_2PI) - 1.5 * np.log(s) - quad
    return _finish(out, pos, -np.inf, scalar)


def ig_pdf(t, p: IGParams):
    return np.exp(ig_logpdf(t, p))


def ig_cdf(t, p: IGParams):
    scalar = np.ndim(t) == 0
    t, pos, s = _positive_part(t)
    root = np.sqrt(p.lam / s)
    first = ndtr(root * (s / p.mu - 1.0))
    second = np.exp(2.0 * p.lam / p.mu + log_ndtr(-root * (s / p.mu + 1.0)))
    return _finish(first + second, pos, 0.0, scalar)


def iw_logpdf(t, p: IWParams):
    scalar = np.ndim(t) == 0
    t, pos, s = _positive_part(t)
    log_ratio = np.log(s) - math.log(p.b)
    with np.errstate(over="ignore"):
        out = math.log(p.c) - math.log(p.b) - (p.c + 1.0) * log_ratio - np.exp(-p.c * log_ratio)
    return _finish(out, pos, -np.inf, scalar)


def iw_pdf(t, p: IWParams):
    return np.exp(iw_logpdf(t, p))


def iw_cdf(t, p: IWParams):
    scalar = np.ndim(t) == 0
    t, pos, s = _positive_part(t)
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(-p.c * (np.log(s) - math.log(p.b))))
    return _finish(out, pos, 0.0, scalar)


def mixture_logpdf(t, p: MixtureParams):
    with np.errstate(divide="ignore"):
        a = math.log(p.w1) if p.w1 > 0 else -np.inf
        b = math.log(p.w2) if p.w2 > 0 else -np.inf
    if b == -np.inf:
        return ig_logpdf(t, p.ig)
    if a == -np.inf:
        return iw_logpdf(t, p.iw)
    out = np.logaddexp(a + ig_logpdf(t, p.ig), b + iw_logpdf(t, p.iw))
    return float(out) if np.ndim(out) == 0 else out


def mixture_pdf(t, p: MixtureParams):
    return np.exp(mixture_logpdf(t, p))


def mixture_cdf(t, p: MixtureParams):
    if p.w2 == 0.0:
        return ig_cdf(t, p.ig)
    if p.w1 == 0.0:
        return iw_cdf(t, p.iw)
    return p.w1 * ig_cdf(t, p.ig) + p.w2 * iw_cdf(t, p.iw)


# --------------------------------------------------------------------------
# sampling


def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _ig_draw(rng, n, p: IGParams):
    # Michael, Schucany & Haas (1976): root of the chi-square transform,
    # choosing between the two roots with probability mu / (mu + x).
    y = rng.standard_normal(n) ** 2
    a = p.mu * y / (2.0 * p.lam)
    x = p.mu / (1.0 + a + np.sqrt(a * a + 2.0 * a))
    u = rng.random(n)
    return np.where(u <= p.mu / (p.mu + x), x, p.mu * p.mu / x)


def iw_quantile(u, p: IWParams):
    """Inverse CDF: b * (-ln u)**(-1/c)."""
    return p.b * (-np.log(u)) ** (-1.0 / p.c)


def _iw_draw(rng, n, p: IWParams):
    u = rng.random(n)
    # u == 0 has probability 2**-53 but would map to 0
    u = np.where(u > 0.0, u, np.nextafter(0.0, 1.0))
    return iw_quantile(u, p)


def _model_meta(name, params, n):
    return {"model": name, "params": params, "n": n}


def ig_sample(p: IGParams, n: int, seed: int) -> SampleSet:
    values = _ig_draw(_rng(seed), n, p)
    return SampleSet(values, "model_power", seed, _model_meta("ig", {"mu": p.mu, "lam": p.lam}, n))


def iw_sample(p: IWParams, n: int, seed: int) -> SampleSet:
    values = _iw_draw(_rng(seed), n, p)
    return SampleSet(values, "model_power", seed, _model_meta("iw", {"b": p.b, "c": p.c}, n))


def mixture_draw(rng: np.random.Generator, n: int, p: MixtureParams, return_labels: bool = False):
    """Mixture draws from an existing generator; label 0 = IG, 1 = IW."""
    from_ig = rng.random(n) < p.w1
    ig = _ig_draw(rng, n, p.ig) if p.ig is not None else np.zeros(n)
    iw = _iw_draw(rng, n, p.iw) if p.iw is not None else np.zeros(n)
    values = np.where(from_ig, ig, iw)
    if return_labels:
        return values, (~from_ig).astype(int)
    return values


def mixture_sample(p: MixtureParams, n: int, seed: int) -> SampleSet:
    values, labels = mixture_draw(_rng(seed), n, p, return_labels=True)
    meta = _model_meta("mixture", p.as_dict(), n)
    meta["ig_fraction"] = float(np.mean(labels == 0))
    return SampleSet(values, "model_power", seed, meta)
