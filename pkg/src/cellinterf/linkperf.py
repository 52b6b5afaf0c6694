"""Per-user capacity and outage under dominant-mode beamforming.

The direct channel is ``H0 = sqrt(l(d)) * H~`` with ``H~`` i.i.d. CN(0, 1)
entries and ``l`` the same shadowed power-law gain that the interferers see.
The user transmits along the dominant right singular vector ``w0``. The
receiver combines with either

* IU: the dominant left singular vector ``v1`` of ``H0``;
* IA: the whitened matched filter ``R0^{-1} H0 w0`` with ``R0 = Sigma0 + s2 I``;
* limited: perfect sectored-beam alignment with main-lobe gain ``M``.

Interference comes from the Poisson-field simulator or, for IU and limited,
from scalar draws of a fitted power model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fitness import ks_critical, ks_distance
from .heavytail_dist import MixtureParams, mixture_draw
from .stochastic_net import (
    ChannelParams,
    ConfigError,
    NetworkConfig,
    SampleSet,
    SectoredAntenna,
    dbm_to_watt,
    resolve_r_max,
    sample_interference_covariance,
    sample_interference_power_limited,
)

COMBINING = ("IU", "IA", "limited")
SOURCES = ("simulated", "model")

_LINK_STREAM = 0x4C494E4B  # separates direct-link draws from interference blocks


@dataclass(frozen=True)
class LinkConfig:
    """Direct-link settings. ``noise_dbm_hz`` is taken per unit bandwidth."""

    distance: float = 145.0
    noise_dbm_hz: float = -124.0
    target_rate: float = 1.0
    combining: str = "IU"
    source: str = "simulated"
    model: MixtureParams | None = None
    diag_only_ia: bool = False

    def __post_init__(self):
        if self.combining not in COMBINING:
            raise ConfigError(f"combining must be one of {COMBINING}")
        if self.source not in SOURCES:
            raise ConfigError(f"interference source must be one of {SOURCES}")
        if not self.distance > 0:
            raise ConfigError("user distance must be > 0")
        if self.source == "model" and self.model is None:
            raise ConfigError("model interference needs fitted parameters")
        if self.source == "model" and self.combining == "IA" and not self.diag_only_ia:
            raise ConfigError(
                "model-based IA ignores interference correlation; set diag_only_ia to accept that"
            )

    @property
    def noise_power(self) -> float:
        return dbm_to_watt(self.noise_dbm_hz)


@dataclass
class RateCdf:
    rates: np.ndarray
    cdf: np.ndarray
    n: int

    @classmethod
    def from_samples(cls, rates) -> "RateCdf":
        r = np.sort(np.asarray(rates, dtype=float))
        n = len(r)
        if n == 0:
            raise ValueError("no rate samples")
        return cls(r, np.arange(1, n + 1) / n, n)

    def outage(self, target_rate: float) -> float:
        return outage(self, target_rate)

    def sup_distance(self, other: "RateCdf") -> float:
        return ks_distance(self.rates, other.rates)

    def to_csv(self, max_rows: int | None = None) -> str:
        idx = np.arange(self.n)
        if max_rows is not None and self.n > max_rows:
            idx = np.unique(np.linspace(0, self.n - 1, max_rows).round().astype(int))
        lines = ["rate,cdf"] + [f"{float(self.rates[i])!r},{float(self.cdf[i])!r}" for i in idx]
        return "\n".join(lines) + "\n"


def outage(cdf: RateCdf, target_rate: float) -> float:
    """P{C < R_T}: fraction of rates strictly below the target."""
    return float(np.searchsorted(cdf.rates, target_rate, side="left")) / cdf.n


# --------------------------------------------------------------------------
# linear algebra


def dominant_mode(h: np.ndarray, tol: float = 1e-10, max_squarings: int = 64):
    """Dominant singular triple ``(s_max, u, w)`` of ``h`` (batched over axis 0).

    Works on the Gram matrix ``h^H h`` by repeated squaring, which is power
    iteration with every possible start vector at once; the column of largest
    norm then gives ``w`` without depending on a start vector. Ends with a few
    plain power steps to polish ``w``.
    """
    h = np.asarray(h, dtype=complex)
    single = h.ndim == 2
    if single:
        h = h[None]
    if h.ndim != 3:
        raise ValueError("channel must be a matrix or a stack of matrices")
    gram = np.conj(np.swapaxes(h, 1, 2)) @ h
    a = gram / np.maximum(np.trace(gram, axis1=1, axis2=2).real, 1e-300)[:, None, None]
    for _ in range(max_squarings):
        nxt = a @ a
        nxt /= np.maximum(np.trace(nxt, axis1=1, axis2=2).real, 1e-300)[:, None, None]
        done = np.max(np.abs(nxt - a)) < tol * 1e-2
        a = nxt
        if done:
            break
    col = np.argmax(np.linalg.norm(a, axis=1), axis=1)
    w = a[np.arange(len(a)), :, col]
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    for _ in range(3):
        w = (gram @ w[:, :, None])[:, :, 0]
        w /= np.maximum(np.linalg.norm(w, axis=1, keepdims=True), 1e-300)
    hw = (h @ w[:, :, None])[:, :, 0]
    s = np.linalg.norm(hw, axis=1)
    u = hw / np.maximum(s, 1e-300)[:, None]
    # fix the phase so the first nonzero entry of w is real positive
    phase = np.exp(-1j * np.angle(w[np.arange(len(w)), np.argmax(np.abs(w) > 1e-12, axis=1)]))
    w, u = w * phase[:, None], u * phase[:, None]
    if single:
        return float(s[0]), u[0], w[0]
    return s, u, w


def _interference_after(u, sigma0):
    sigma0 = np.asarray(sigma0)
    if sigma0.ndim == u.ndim - 1:
        return sigma0.astype(float)  # already a post-combining scalar
    q = np.einsum("...i,...ij,...j->...", np.conj(u), sigma0, u)
    return q.real


def capacity_iu(h0, interference, noise: float, p_tx: float):
    """log2(1 + s_max^2 P / (noise + v1^H Sigma0 v1)).

    ``interference`` is either a covariance draw (matching ``h0``'s receive
    dimension) or an already-combined scalar power.
    """
    h0 = np.asarray(h0, dtype=complex)
    s, u, _ = dominant_mode(h0)
    sig = np.asarray(interference)
    if sig.ndim >= 2 and sig.shape[-1] != h0.shape[-2]:
        raise ValueError("covariance and channel receive dimensions differ")
    i_post = _interference_after(u, sig)
    return np.log2(1.0 + np.asarray(s) ** 2 * p_tx / (noise + i_post))


def _whiten_gain(r0, g, floor):
    # g^H R0^{-1} g via eigendecomposition with eigenvalues floored at ``floor``
    ev, vec = np.linalg.eigh(r0)
    ev = np.maximum(ev, floor)
    proj = np.einsum("...ji,...j->...i", np.conj(vec), g)
    return np.sum(np.abs(proj) ** 2 / ev, axis=-1)


def capacity_ia(h0, sigma0, noise: float, p_tx: float):
    """log2(1 + P || R0^{-1/2} H0 w0 ||^2) with ``R0 = Sigma0 + noise I``."""
    h0 = np.asarray(h0, dtype=complex)
    sigma0 = np.asarray(sigma0, dtype=complex)
    if sigma0.shape[-1] != h0.shape[-2] or sigma0.shape[-2] != h0.shape[-2]:
        raise ValueError("covariance and channel receive dimensions differ")
    scale = np.max(np.abs(sigma0)) + noise
    if np.max(np.abs(sigma0 - np.conj(np.swapaxes(sigma0, -1, -2)))) > 1e-9 * scale:
        raise ValueError("interference covariance is not Hermitian")
    r0 = sigma0 + noise * np.eye(h0.shape[-2])
    ev_min = np.linalg.eigvalsh(r0).min()
    if ev_min < -1e-9 * scale:
        raise ValueError("noise-plus-interference covariance is indefinite")
    _, _, w = dominant_mode(h0)
    g = np.einsum("...ij,...j->...i", h0, w)
    return np.log2(1.0 + p_tx * _whiten_gain(r0, g, noise))


def capacity_limited(distance, ch: ChannelParams, ant: SectoredAntenna, a0, interference, noise, p_tx):
    """log2(1 + M^2 |a0|^2 l(d) P / (noise + sigma0^2)).

    ``l(d)`` is the unshadowed path gain; pass shadowing through ``a0``.
    """
    gain = ch.beta * float(distance) ** (-ch.alpha)
    sig = ant.gain_main**2 * np.abs(a0) ** 2 * gain * p_tx
    return np.log2(1.0 + sig / (noise + np.asarray(interference, dtype=float)))


# --------------------------------------------------------------------------
# Monte Carlo


def _link_rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), _LINK_STREAM])))


def _direct_channels(rng, n, ch, net, distance):
    shape = (n, int(net.n_bs), int(net.n_ue))
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)
    gain = ch.beta * distance ** (-ch.alpha) * np.ones(n)
    if ch.sigma_sf_db > 0:
        gain = gain * np.exp(rng.normal(0.0, ch.shadow_log_std, n))
    return h * np.sqrt(gain)[:, None, None]


def _check_distance(link, ch, net):
    if net.r_max is not None or ch.alpha > 2:
        if link.distance >= resolve_r_max(ch, net):
            raise ConfigError("user distance must be inside r_max")


def sample_rates(
    link: LinkConfig,
    ch: ChannelParams,
    net: NetworkConfig,
    n: int,
    seed: int,
    ant: SectoredAntenna | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """``n`` capacity draws (bits/s/Hz) for the configured link.

    The direct-link draws use a stream separate from the interference blocks,
    so simulated and model-based runs with one seed see the same channels.
    """
    _check_distance(link, ch, net)
    rng = _link_rng(seed)
    noise, p = link.noise_power, net.p_tx

    if link.combining == "limited":
        if ant is None:
            raise ConfigError("limited scattering needs a sectored antenna")
        a0 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        if ch.sigma_sf_db > 0:
            a0 = a0 * np.exp(0.5 * rng.normal(0.0, ch.shadow_log_std, n))
        if link.source == "model":
            interf = mixture_draw(rng, n, link.model)
        else:
            interf = sample_interference_power_limited(ch, net, ant, n, seed, workers).values
        return capacity_limited(link.distance, ch, ant, a0, interf, noise, p)

    h0 = _direct_channels(rng, n, ch, net, link.distance)
    if link.source == "model":
        if link.combining == "IU":
            return capacity_iu(h0, mixture_draw(rng, n, link.model), noise, p)
        # diagonal-only IA: independent model draws per antenna, no correlation
        diag = mixture_draw(rng, n * int(net.n_bs), link.model).reshape(n, int(net.n_bs))
        sigma0 = np.zeros((n, int(net.n_bs), int(net.n_bs)), dtype=complex)
        idx = np.arange(int(net.n_bs))
        sigma0[:, idx, idx] = diag
        return capacity_ia(h0, sigma0, noise, p)

    sigma0 = sample_interference_covariance(ch, net, seed, n, workers)
    if link.combining == "IU":
        return capacity_iu(h0, sigma0, noise, p)
    return capacity_ia(h0, sigma0, noise, p)


def rate_cdf(link, ch, net, n, seed, ant=None, workers=None) -> RateCdf:
    if n < 1000:
        raise ConfigError("rate CDF needs at least 1000 draws")
    return RateCdf.from_samples(sample_rates(link, ch, net, n, seed, ant, workers))


# --------------------------------------------------------------------------
# post-combining interference


@dataclass
class Lemma1Result:
    post: SampleSet
    diag: SampleSet
    ks: float
    critical: float

    @property
    def passed(self) -> bool:
        return self.ks < self.critical


def lemma1_check(
    ch: ChannelParams,
    net: NetworkConfig,
    n: int,
    seed: int,
    level: float = 0.01,
    combiner: str = "channel",
    workers: int | None = None,
) -> Lemma1Result:
    """Compare ``v1^H Sigma0 v1`` with a diagonal element of ``Sigma0``.

    ``2n`` covariance draws are split in halves: the first half is combined
    with ``v1`` from independent direct-channel draws, the second supplies
    ``[Sigma0]_11``, so the KS critical value for independent samples
    applies. ``combiner="interference"`` instead uses the dominant
    eigenvector of each ``Sigma0``, a negative control that the test must
    reject. With a single receive antenna the combiner is a unit phase and
    both samples are the same draws.
    """
    if combiner not in ("channel", "interference"):
        raise ValueError("combiner must be 'channel' or 'interference'")
    if int(net.n_bs) == 1:
        sig = sample_interference_covariance(ch, net, seed, n, workers)
        first = second = sig
    else:
        sig = sample_interference_covariance(ch, net, seed, 2 * n, workers)
        first, second = sig[:n], sig[n:]
    if int(net.n_bs) == 1:
        post = first[:, 0, 0].real.copy()
    elif combiner == "channel":
        h0 = _direct_channels(_link_rng(seed), n, ch, net, 1.0)
        _, u, _ = dominant_mode(h0)
    else:
        _, vec = np.linalg.eigh(first)
        u = vec[:, :, -1]
    if int(net.n_bs) > 1:
        post = _interference_after(u, first)
    diag = second[:, 0, 0].real.copy()
    meta = {"n_bs": int(net.n_bs), "combiner": combiner}
    post_s = SampleSet(np.maximum(post, 0.0), "rich_power", seed, dict(meta, quantity="post_combining"))
    diag_s = SampleSet(diag, "rich_power", seed, dict(meta, quantity="diagonal"))
    ks = ks_distance(post_s, diag_s)
    return Lemma1Result(post_s, diag_s, ks, ks_critical(n, n, level))
