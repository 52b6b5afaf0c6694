"""Moment matching, single-model MLE and mixture EM for interference power.

Every likelihood fit pins the model mean to the sample mean ``mu_Y`` first.
That leaves one free parameter per component: ``lam`` for the inverse
Gaussian (closed form) and ``c`` for the inverse Weibull, whose scale then
follows as ``b = mu_Y / Gamma(1 - 1/c)``. The shape ``c`` is the root of a
score equation solved by bracketed Brent iteration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .heavytail_dist import IGParams, IWParams, MixtureParams, ig_logpdf, iw_logpdf, mixture_logpdf
from .moments import MomentPair
from .specfun import digamma, gamma, lgamma
from .stochastic_net import SampleSet

METHODS = ("ig_mm", "iw_mm", "ig_mle", "iw_mle", "mixture_em")

IW_MM_CLAMP = 2.01
_SCORE_CLIP = 1e300


class EstimationError(ArithmeticError):
    """A fit could not be completed numerically."""

    def __init__(self, message, **state):
        super().__init__(message)
        self.state = state


class RootBracketError(EstimationError):
    """No sign change of the shape equation inside the search interval."""


@dataclass
class FitReport:
    params: MixtureParams
    method: str
    loglik_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    kl: float | None = None
    n: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown fit method {self.method!r}")

    def logpdf(self, t):
        return mixture_logpdf(t, self.params)

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1] if self.loglik_trace else math.nan

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "params": self.params.as_dict(),
            "loglik_trace": [float(v) for v in self.loglik_trace],
            "iterations": self.iterations,
            "converged": self.converged,
            "kl": self.kl,
            "n": self.n,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        return cls(
            params=MixtureParams.from_dict(d["params"]),
            method=d["method"],
            loglik_trace=list(d.get("loglik_trace", [])),
            iterations=int(d.get("iterations", 0)),
            converged=bool(d.get("converged", True)),
            kl=d.get("kl"),
            n=int(d.get("n", 0)),
            notes=dict(d.get("notes", {})),
        )


@dataclass(frozen=True)
class EMConfig:
    """Settings for :func:`fit_mixture_em`.

    ``init`` is an optional ``(w1, lam, c)`` triple; missing entries come from
    the individual MLE fits, with ``w1 = 0.5``.
    """

    delta: float = 1e-6
    max_iter: int = 500
    init: tuple | None = None
    c_bracket: tuple = (1.01, 500.0)
    xtol: float = 1e-12

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        lo, hi = self.c_bracket
        if not 1.0 < lo < hi:
            raise ValueError("c_bracket must satisfy 1 < lo < hi")


# --------------------------------------------------------------------------
# moment matching


def _check_moments(mom: MomentPair):
    if not (mom.mean > 0 and mom.variance > 0):
        raise ValueError("moment matching needs positive mean and variance")


def fit_ig_mm(mom: MomentPair) -> IGParams:
    _check_moments(mom)
    return IGParams(mom.mean, mom.mean**3 / mom.variance)


def iw_dispersion(c):
    """var / mean**2 of an inverse Weibull with shape ``c > 2``."""
    return math.expm1(lgamma(1.0 - 2.0 / c) - 2.0 * lgamma(1.0 - 1.0 / c))


def solve_iw_shape(ratio: float, c_max: float = 1e4) -> tuple[float, bool]:
    """Shape ``c`` with ``iw_dispersion(c) == ratio``; returns ``(c, clamped)``.

    Ratios needing ``c <= 2.01`` are clamped to 2.01. A ratio too small to
    reach within ``c_max`` raises :class:`RootBracketError`.
    """
    if not ratio > 0:
        raise ValueError("dispersion ratio must be > 0")
    if ratio >= iw_dispersion(IW_MM_CLAMP):
        return IW_MM_CLAMP, True
    hi = 50.0
    while iw_dispersion(hi) > ratio:
        hi *= 4.0
        if hi > c_max:
            raise RootBracketError(
                f"no IW shape reaches var/mean^2={ratio:g} below c={c_max:g}", ratio=ratio
            )
    c = brentq(lambda x: iw_dispersion(x) - ratio, IW_MM_CLAMP, hi, xtol=1e-13, rtol=1e-15)
    return float(c), False


def fit_iw_mm(mom: MomentPair) -> IWParams:
    _check_moments(mom)
    c, _ = solve_iw_shape(mom.variance / mom.mean**2)
    return IWParams(mom.mean / gamma(1.0 - 1.0 / c), c)


# --------------------------------------------------------------------------
# likelihood pieces


def _values(samples) -> np.ndarray:
    y = np.asarray(samples.values if isinstance(samples, SampleSet) else samples, dtype=float)
    if y.ndim != 1 or len(y) < 2:
        raise ValueError("need a 1-D array of at least 2 samples")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise ValueError("samples must be finite and strictly positive")
    return y


def _ig_lambda(y, mu, weights=None):
    dev = (y - mu) ** 2 / y
    if weights is None:
        n1, denom = len(y), float(np.sum(dev))
    else:
        n1, denom = float(np.sum(weights)), float(np.sum(weights * dev))
    if not denom > 0:
        raise EstimationError("IG shape is unbounded: samples have no spread", n=n1)
    return n1 * mu * mu / denom


def iw_score(c: float, y: np.ndarray, mu: float, weights=None, log_y=None) -> float:
    """Weighted IW likelihood derivative in ``c`` with ``b`` tied to the mean.

    Normalized by the total weight. The term ``b**c * y**-c`` is summed in
    the log domain and the result clipped to a finite value, so the sign is
    always usable for bracketing even where the magnitude overflows.
    """
    if log_y is None:
        log_y = np.log(y)
    w = np.ones_like(y) if weights is None else weights
    n2 = float(np.sum(w))
    inv_c = 1.0 / c
    psi = digamma(1.0 - inv_c)
    log_b = math.log(mu) - lgamma(1.0 - inv_c)
    head = log_b + inv_c * (1.0 - psi) - float(np.sum(w * log_y)) / n2

    factor = log_y - log_b + psi * inv_c
    log_mag = c * (log_b - log_y) + np.log(np.where(w > 0, w, 1.0)) + np.log(np.abs(factor) + 1e-300)
    live = (w > 0) & (factor != 0)
    pos = live & (factor > 0)
    neg = live & (factor < 0)
    lp = logsumexp(log_mag[pos]) if np.any(pos) else -np.inf
    ln = logsumexp(log_mag[neg]) if np.any(neg) else -np.inf
    big = max(lp, ln)
    if big == -np.inf:
        tail = 0.0
    else:
        # exp(big) * (exp(lp - big) - exp(ln - big)) / n2
        diff = math.exp(lp - big) - math.exp(ln - big)
        scale = big - math.log(n2)
        tail = 0.0 if diff == 0.0 else math.copysign(math.exp(min(scale + math.log(abs(diff)), 690.0)), diff)
    return float(np.clip(head + tail, -_SCORE_CLIP, _SCORE_CLIP))


def solve_iw_mle_shape(y, mu, weights=None, bracket=(1.01, 500.0), xtol=1e-12, log_y=None, guess=None):
    """Root of :func:`iw_score` inside ``bracket``, widened geometrically if needed.

    With ``guess`` a narrow bracket around it is tried first; inside EM the
    shape moves little between iterations and this saves most evaluations.
    """
    if log_y is None:
        log_y = np.log(y)
    f = lambda c: iw_score(c, y, mu, weights, log_y)  # noqa: E731
    lo, hi = bracket
    if guess is not None and lo < guess < hi:
        a, b = max(lo, 1.0 + (guess - 1.0) / 1.2), min(hi, guess * 1.2)
        fa, fb = f(a), f(b)
        if fa * fb < 0:
            return float(brentq(f, a, b, xtol=xtol, rtol=1e-15, maxiter=500))
    f_lo, f_hi = f(lo), f(hi)
    tries = 0
    while f_lo * f_hi > 0 and tries < 12:
        tries += 1
        lo = 1.0 + (lo - 1.0) / 4.0
        hi = hi * 4.0
        f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise RootBracketError(
            "IW shape equation has no sign change",
            bracket=(lo, hi),
            score_lo=f_lo,
            score_hi=f_hi,
        )
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    return float(brentq(f, lo, hi, xtol=xtol, rtol=1e-15, maxiter=500))


def _iw_tied(mu, c):
    return IWParams(mu / gamma(1.0 - 1.0 / c), c)


def _weighted_iw_loglik(y, mu, c, weights):
    return float(np.sum(weights * iw_logpdf(y, _iw_tied(mu, c))))


def fit_ig_mle(samples) -> FitReport:
    y = _values(samples)
    mu = float(np.mean(y))
    p = IGParams(mu, _ig_lambda(y, mu))
    ll = float(np.mean(ig_logpdf(y, p)))
    return FitReport(MixtureParams.single(p), "ig_mle", [ll], 1, True, n=len(y))


def fit_iw_mle(samples, bracket=(1.01, 500.0)) -> FitReport:
    y = _values(samples)
    mu = float(np.mean(y))
    c = solve_iw_mle_shape(y, mu, bracket=bracket)
    p = _iw_tied(mu, c)
    ll = float(np.mean(iw_logpdf(y, p)))
    return FitReport(MixtureParams.single(p), "iw_mle", [ll], 1, True, n=len(y))


def moment_fit_report(samples, method: str, mom: MomentPair | None = None) -> FitReport:
    """Wrap a moment-matched IG or IW fit in a :class:`FitReport`.

    ``mom`` defaults to the sample moments of ``samples``.
    """
    y = _values(samples)
    if mom is None:
        mom = MomentPair(float(np.mean(y)), float(np.var(y, ddof=1)), "numeric")
    if method == "ig_mm":
        params = MixtureParams.single(fit_ig_mm(mom))
    elif method == "iw_mm":
        params = MixtureParams.single(fit_iw_mm(mom))
    else:
        raise ValueError(f"not a moment method: {method!r}")
    ll = float(np.mean(mixture_logpdf(y, params)))
    return FitReport(params, method, [ll], 1, True, n=len(y), notes={"moments": [mom.mean, mom.variance]})


# --------------------------------------------------------------------------
# EM


def _component_logpdfs(y, p: MixtureParams):
    lig = ig_logpdf(y, p.ig) if p.ig is not None else np.full_like(y, -np.inf)
    liw = iw_logpdf(y, p.iw) if p.iw is not None else np.full_like(y, -np.inf)
    return lig, liw


def em_responsibilities(samples, p: MixtureParams):
    """Posterior component probabilities ``gamma`` (n x 2) and their sums ``n_j``."""
    y = samples if isinstance(samples, np.ndarray) else _values(samples)
    lig, liw = _component_logpdfs(y, p)
    with np.errstate(divide="ignore"):
        a = np.log(p.w1) + lig if p.w1 > 0 else np.full_like(y, -np.inf)
        b = np.log(p.w2) + liw if p.w2 > 0 else np.full_like(y, -np.inf)
    norm = np.logaddexp(a, b)
    g1 = np.exp(a - norm)
    gam = np.column_stack([g1, 1.0 - g1])
    return gam, gam.sum(axis=0)


def em_m_step(y, gam, mu, prev: MixtureParams, cfg: EMConfig, log_y=None) -> MixtureParams:
    """One M-step: weights from ``n_j / n``, closed-form ``lam``, ``c`` by root.

    A component with (numerically) zero total responsibility keeps its
    previous shape. The new ``c`` is accepted only if it does not lower the
    weighted IW log-likelihood, which keeps EM monotone even if the score
    equation has several roots.
    """
    n = len(y)
    n1, n2 = float(gam[:, 0].sum()), float(gam[:, 1].sum())
    w1 = min(max(n1 / n, 0.0), 1.0)
    tiny = 1e-12 * n

    ig = prev.ig
    if n1 > tiny:
        ig = IGParams(mu, _ig_lambda(y, mu, gam[:, 0]))
    iw = prev.iw
    if n2 > tiny:
        try:
            guess = prev.iw.c if prev.iw is not None else None
            c = solve_iw_mle_shape(y, mu, gam[:, 1], cfg.c_bracket, cfg.xtol, log_y, guess)
        except RootBracketError as exc:
            raise EstimationError(
                "IW shape update failed inside the M-step",
                w1=prev.w1,
                lam=prev.ig.lam if prev.ig else None,
                c=prev.iw.c if prev.iw else None,
                **exc.state,
            ) from exc
        if prev.iw is None or _weighted_iw_loglik(y, mu, c, gam[:, 1]) >= _weighted_iw_loglik(
            y, mu, prev.iw.c, gam[:, 1]
        ):
            iw = _iw_tied(mu, c)
    return MixtureParams(w1, ig, iw)


def _mean_loglik(y, p):
    return float(np.mean(mixture_logpdf(y, p)))


def fit_mixture_em(samples, cfg: EMConfig = EMConfig()) -> FitReport:
    """Fit ``w1 IG(mu_Y, lam) + (1 - w1) IW(b(c), c)`` by expectation maximization.

    Stops when the mean log-likelihood changes by less than ``cfg.delta``.
    """
    y = _values(samples)
    if len(y) < 10:
        raise ValueError("mixture EM needs at least 10 samples")
    mu = float(np.mean(y))
    log_y = np.log(y)

    init = tuple(cfg.init) if cfg.init is not None else ()
    w1 = float(init[0]) if len(init) > 0 and init[0] is not None else 0.5
    lam = float(init[1]) if len(init) > 1 and init[1] is not None else _ig_lambda(y, mu)
    if len(init) > 2 and init[2] is not None:
        c = float(init[2])
    else:
        c = solve_iw_mle_shape(y, mu, bracket=cfg.c_bracket, xtol=cfg.xtol, log_y=log_y)
    params = MixtureParams(w1, IGParams(mu, lam), _iw_tied(mu, c))

    trace = [_mean_loglik(y, params)]
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        gam, _ = em_responsibilities(y, params)
        params = em_m_step(y, gam, mu, params, cfg, log_y)
        trace.append(_mean_loglik(y, params))
        if abs(trace[-1] - trace[-2]) < cfg.delta:
            converged = True
            break
    notes = {"mu_y": mu, "init": {"w1": w1, "lam": lam, "c": c}}
    return FitReport(params, "mixture_em", trace, it, converged, n=len(y), notes=notes)


def fit(samples, method: str, cfg: EMConfig | None = None, mom: MomentPair | None = None) -> FitReport:
    """Dispatch by method name (``ig_mm``, ``iw_mm``, ``ig_mle``, ``iw_mle``, ``mixture_em``)."""
    method = method.replace("-", "_")
    if method == "mixture":
        method = "mixture_em"
    if method in ("ig_mm", "iw_mm"):
        return moment_fit_report(samples, method, mom)
    if method == "ig_mle":
        return fit_ig_mle(samples)
    if method == "iw_mle":
        return fit_iw_mle(samples, bracket=(cfg or EMConfig()).c_bracket)
    if method == "mixture_em":
        return fit_mixture_em(samples, cfg or EMConfig())
    raise ValueError(f"unknown fit method {method!r}")
