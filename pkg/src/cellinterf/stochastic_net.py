"""Poisson-field interference simulation for rich and limited scattering.

Interferers form a homogeneous PPP on the annulus ``r_cell <= r <= r_max``
around the receiving base station at the origin. Each interferer reaches the
receiver through log-normal shadowing, power-law path loss and Rayleigh
fading. All samplers are pure functions of ``(config, seed)``.

Randomness is organised in fixed blocks of ``BLOCK_SIZE`` realizations; block
``k`` draws from a Philox stream keyed by ``(seed, k)``. Because the block
partition does not depend on the number of workers, serial and parallel runs
return identical arrays.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

ZETA = 10.0 / math.log(10.0)

BLOCK_SIZE = 512

# Default cap on the expected number of interferers per realization when the
# truncation radius is derived automatically.
DEFAULT_POINT_BUDGET = 1000.0

# Default target for the mean mass lost beyond r_max (relative).
DEFAULT_TAIL_FRACTION = 1e-3

POWER_KINDS = ("rich_power", "limited_power", "model_power")
SAMPLE_KINDS = POWER_KINDS + ("corr_coeff", "covariance")


class ConfigError(ValueError):
    """Invalid channel, network or antenna configuration."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Large-scale channel: path loss ``beta * r**-alpha`` times shadowing.

    ``sigma_sf_db`` is the standard deviation of the shadowing in dB, i.e.
    ``L_s = 10**(S/10)`` with ``S ~ N(0, sigma_sf_db**2)``.
    """

    alpha: float = 3.0
    beta_db: float = -72.3
    sigma_sf_db: float = 0.0
    zeta: float = field(default=ZETA, init=False)

    def __post_init__(self):
        if not self.alpha >= 2.0:
            raise ConfigError(f"path-loss exponent must be >= 2, got {self.alpha}")
        if not self.sigma_sf_db >= 0.0:
            raise ConfigError(f"shadowing std-dev must be >= 0, got {self.sigma_sf_db}")
        if not math.isfinite(self.beta_db):
            raise ConfigError("path-loss intercept must be finite")

    @property
    def beta(self) -> float:
        return db_to_linear(self.beta_db)

    @property
    def shadow_log_std(self) -> float:
        """Std-dev of ln(L_s)."""
        return self.sigma_sf_db / self.zeta

    @property
    def shadow_mean(self) -> float:
        """E[L_s]."""
        return math.exp(0.5 * self.shadow_log_std**2)

    @property
    def shadow_second_moment(self) -> float:
        """E[L_s**2]."""
        return math.exp(2.0 * self.shadow_log_std**2)

    def path_gain(self, r, shadow=1.0):
        return shadow * self.beta * np.asarray(r, dtype=float) ** (-self.alpha)


@dataclass(frozen=True)
class NetworkConfig:
    """Interferer field and radio front-end.

    ``lambda1`` is the base UE intensity and ``eta`` the density factor; the
    interfering PPP has intensity ``eta * lambda1``. When ``r_cell`` is not
    given it is set to ``1 / (2 sqrt(eta * lambda1))``. ``r_max=None`` means
    "derive from the channel" (see :func:`resolve_r_max`).
    """

    lambda1: float
    eta: float = 1.0
    r_cell: float | None = None
    p_tx_dbm: float = 30.0
    r_max: float | None = None
    n_bs: int = 1
    n_ue: int = 1

    def __post_init__(self):
        if not (self.lambda1 >= 0.0 and math.isfinite(self.lambda1)):
            raise ConfigError("lambda1 must be finite and >= 0")
        if not self.eta > 0.0:
            raise ConfigError("eta must be > 0")
        if self.r_cell is None:
            if self.lambda1 <= 0.0:
                raise ConfigError("r_cell must be given when lambda1 == 0")
            object.__setattr__(self, "r_cell", 1.0 / (2.0 * math.sqrt(self.eta * self.lambda1)))
        if not self.r_cell > 0.0:
            raise ConfigError("r_cell must be > 0")
        if self.r_max is not None and not (self.r_max > self.r_cell and math.isfinite(self.r_max)):
            raise ConfigError(f"r_max must be finite and > r_cell ({self.r_cell}), got {self.r_max}")
        if int(self.n_bs) != self.n_bs or self.n_bs < 1 or int(self.n_ue) != self.n_ue or self.n_ue < 1:
            raise ConfigError("antenna counts must be integers >= 1")

    @classmethod
    def from_cell_radius(cls, r_cell: float, eta: float = 1.0, **kwargs) -> "NetworkConfig":
        """Build the config whose typical cell has radius ``r_cell``."""
        lambda1 = 1.0 / (4.0 * eta * r_cell**2)
        return cls(lambda1=lambda1, eta=eta, r_cell=r_cell, **kwargs)

    @property
    def intensity(self) -> float:
        """Intensity of the interfering PPP (eta * lambda1), points per m^2."""
        return self.eta * self.lambda1

    @property
    def p_tx(self) -> float:
        return dbm_to_watt(self.p_tx_dbm)


@dataclass(frozen=True)
class SectoredAntenna:
    gain_main: float
    gain_back: float
    beamwidth: float
    n_clusters: int = 1

    def __post_init__(self):
        if not (self.gain_main >= self.gain_back > 0.0):
            raise ConfigError("need gain_main >= gain_back > 0")
        if not (0.0 < self.beamwidth <= 2.0 * math.pi):
            raise ConfigError("beamwidth must be in (0, 2*pi]")
        if int(self.n_clusters) != self.n_clusters or self.n_clusters < 1:
            raise ConfigError("n_clusters must be an integer >= 1")
        if self.n_clusters * self.beamwidth > 2.0 * math.pi * (1.0 + 1e-12):
            raise ConfigError("n_clusters * beamwidth must not exceed 2*pi")

    @property
    def composite_gains(self) -> tuple[float, float, float]:
        """Link gains for main/main, back/main and back/back alignment."""
        big, small = self.gain_main, self.gain_back
        return big * big, small * big, small * small


@dataclass
class SampleSet:
    """Tagged array of simulated values plus the parameters that produced them."""

    values: np.ndarray
    kind: str
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SAMPLE_KINDS:
            raise ValueError(f"unknown sample kind {self.kind!r}")
        self.values = np.asarray(self.values)
        if self.kind in POWER_KINDS and np.any(self.values < 0):
            raise ValueError("power samples must be nonnegative")

    def __len__(self):
        return len(self.values)


def sectored_gain_probabilities(ant: SectoredAntenna) -> tuple[float, float, float]:
    """Probabilities of the main/main, back/main and back/back gain events."""
    frac = ant.beamwidth / (2.0 * math.pi)
    k = ant.n_clusters
    rest = max(0.0, 1.0 - k * frac)
    p1 = k * frac**2
    p2 = 2.0 * k * rest * frac + (k * k - k) * frac**2
    p3 = rest**2
    return p1, p2, p3


def resolve_r_max(
    ch: ChannelParams,
    net: NetworkConfig,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    point_budget: float = DEFAULT_POINT_BUDGET,
) -> float:
    """Truncation radius used by the samplers.

    An explicit ``net.r_max`` wins. Otherwise the radius is the one beyond
    which the infinite-field mean loses less than ``tail_fraction``,
    ``r_cell * tail_fraction**(-1/(alpha-2))``, capped so that the expected
    number of interferers stays below ``point_budget``. At alpha == 2 the mean
    diverges and r_max must be explicit.
    """
    if net.r_max is not None:
        return float(net.r_max)
    if ch.alpha <= 2.0:
        raise ConfigError("alpha == 2 requires an explicit r_max")
    rc = net.r_cell
    r_tail = rc * tail_fraction ** (-1.0 / (ch.alpha - 2.0))
    if net.intensity > 0:
        r_budget = math.sqrt(rc * rc + point_budget / (math.pi * net.intensity))
        return max(min(r_tail, r_budget), rc * (1.0 + 1e-9))
    return r_tail


# --------------------------------------------------------------------------
# block machinery


def block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(n: int):
    return [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE)]


def default_workers() -> int:
    return max(1, int(os.environ.get("CELLINTERF_WORKERS", "1")))


def _run_blocks(fn: Callable, n: int, seed: int, args: tuple, workers: int | None):
    jobs = _blocks(n)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(jobs) == 1:
        parts = [fn(*args, seed, b, size) for b, size in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, *args, seed, b, size) for b, size in jobs]
            parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0) if parts else np.empty(0)


def _draw_field(rng, count, ch, intensity, r_in, r_out):
    """Interferer geometry and shadowed path gains for ``count`` realizations.

    Returns (owner index per point, large-scale gain per point).
    """
    area = math.pi * (r_out * r_out - r_in * r_in)
    n_pts = rng.poisson(intensity * area, size=count)
    total = int(n_pts.sum())
    u = rng.random(total)
    r = np.sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in))
    gain = ch.beta * r ** (-ch.alpha)
    if ch.sigma_sf_db > 0.0:
        gain *= np.exp(rng.normal(0.0, ch.shadow_log_std, total))
    owner = np.repeat(np.arange(count), n_pts)
    return owner, gain


def _draw_fading(rng, total, n_ant):
    re = rng.standard_normal((total, n_ant))
    im = rng.standard_normal((total, n_ant))
    return (re + 1j * im) * math.sqrt(0.5)


def _rich_block(ch, net, r_max, seed, block, size):
    rng = block_rng(seed, block)
    owner, gain = _draw_field(rng, size, ch, net.intensity, net.r_cell, r_max)
    h = _draw_fading(rng, len(gain), 1)
    power = gain * net.p_tx * (h[:, 0].real ** 2 + h[:, 0].imag ** 2)
    return np.bincount(owner, weights=power, minlength=size)


def _covariance_block(ch, net, r_max, n_ant, seed, block, size):
    rng = block_rng(seed, block)
    owner, gain = _draw_field(rng, size, ch, net.intensity, net.r_cell, r_max)
    h = _draw_fading(rng, len(gain), n_ant)
    a = h * np.sqrt(gain * net.p_tx)[:, None]
    out = np.zeros((size, n_ant, n_ant), dtype=complex)
    for i in range(n_ant):
        out[:, i, i] = np.bincount(owner, weights=a[:, i].real ** 2 + a[:, i].imag ** 2, minlength=size)
        for j in range(i + 1, n_ant):
            cross = a[:, i] * a[:, j].conj()
            re = np.bincount(owner, weights=cross.real, minlength=size)
            im = np.bincount(owner, weights=cross.imag, minlength=size)
            out[:, i, j] = re + 1j * im
            out[:, j, i] = re - 1j * im
    return out


def _pair_block(ch, net, r_max, seed, block, size):
    # columns: q11, q22, q12 for a two-antenna receiver
    rng = block_rng(seed, block)
    owner, gain = _draw_field(rng, size, ch, net.intensity, net.r_cell, r_max)
    h = _draw_fading(rng, len(gain), 2)
    w = gain * net.p_tx
    cross = w * h[:, 0] * h[:, 1].conj()
    out = np.empty((size, 3), dtype=complex)
    out[:, 0] = np.bincount(owner, weights=w * np.abs(h[:, 0]) ** 2, minlength=size)
    out[:, 1] = np.bincount(owner, weights=w * np.abs(h[:, 1]) ** 2, minlength=size)
    out[:, 2] = np.bincount(owner, weights=cross.real, minlength=size)
    out[:, 2] += 1j * np.bincount(owner, weights=cross.imag, minlength=size)
    return out


def _limited_block(ch, net, ant, r_max, seed, block, size):
    rng = block_rng(seed, block)
    owner, gain = _draw_field(rng, size, ch, net.intensity, net.r_cell, r_max)
    cum = np.cumsum(sectored_gain_probabilities(ant))
    cls = np.minimum(np.searchsorted(cum, rng.random(len(gain)), side="right"), 2)
    fade = rng.standard_exponential(len(gain))
    power = np.asarray(ant.composite_gains)[cls] * gain * fade * net.p_tx
    terms = np.bincount(owner * 3 + cls, weights=power, minlength=3 * size)
    return terms.reshape(size, 3)


def _geometry_block(ch, net, r_max, seed, block, size):
    rng = block_rng(seed, block)
    bare = ChannelParams(alpha=ch.alpha, beta_db=ch.beta_db, sigma_sf_db=0.0)
    owner, gain = _draw_field(rng, size, bare, net.intensity, net.r_cell, r_max)
    s1 = np.bincount(owner, weights=gain, minlength=size)
    s2 = np.bincount(owner, weights=gain * gain, minlength=size)
    return np.stack([s1, s2], axis=1)


def _meta(ch, net, r_max, n, **extra):
    meta = {
        "channel": {"alpha": ch.alpha, "beta_db": ch.beta_db, "sigma_sf_db": ch.sigma_sf_db},
        "network": {k: v for k, v in asdict(net).items()},
        "r_max_used": r_max,
        "n": n,
        "block_size": BLOCK_SIZE,
    }
    meta.update(extra)
    return meta


def _check_n(n):
    if int(n) != n or n < 1:
        raise ConfigError("sample count must be an integer >= 1")
    return int(n)


# --------------------------------------------------------------------------
# public samplers


def sample_interference_power_rich(
    ch: ChannelParams, net: NetworkConfig, n: int, seed: int, workers: int | None = None
) -> SampleSet:
    """Per-antenna interference power q0 for ``n`` independent realizations."""
    n = _check_n(n)
    r_max = resolve_r_max(ch, net)
    values = _run_blocks(_rich_block, n, seed, (ch, net, r_max), workers)
    return SampleSet(values, "rich_power", seed, _meta(ch, net, r_max, n))


def sample_path_gain_sums(
    ch: ChannelParams, net: NetworkConfig, n: int, seed: int, workers: int | None = None
) -> np.ndarray:
    """Per-realization sums of ``beta r**-alpha`` and its square, shape ``(n, 2)``.

    Only interferer positions are random here; shadowing and fading are left
    for the caller to integrate out analytically.
    """
    n = _check_n(n)
    r_max = resolve_r_max(ch, net)
    return _run_blocks(_geometry_block, n, seed, (ch, net, r_max), workers)


def sample_interference_covariance(
    ch: ChannelParams, net: NetworkConfig, seed: int, n: int = 1, workers: int | None = None
) -> np.ndarray:
    """Interference covariance draws, shape ``(n, n_bs, n_bs)``.

    Element (i, j) is ``sum_k P l_k h_ki conj(h_kj)`` over the same interferers
    and fading draws; Hermitian symmetry holds exactly. With ``n_bs == 1`` the
    random draws are consumed as in :func:`sample_interference_power_rich`, so
    the single element equals the rich-scattering draw for the same seed up
    to summation rounding.
    """
    n = _check_n(n)
    r_max = resolve_r_max(ch, net)
    return _run_blocks(_covariance_block, n, seed, (ch, net, r_max, int(net.n_bs)), workers)


def sample_antenna_pair(
    ch: ChannelParams, net: NetworkConfig, n: int, seed: int, workers: int | None = None
) -> np.ndarray:
    """Two-antenna covariance entries ``(q11, q22, q12)``, shape ``(n, 3)`` complex."""
    n = _check_n(n)
    r_max = resolve_r_max(ch, net)
    return _run_blocks(_pair_block, n, seed, (ch, net, r_max), workers)


def sample_offdiag_interference(
    ch: ChannelParams, net: NetworkConfig, n: int, seed: int, workers: int | None = None
) -> np.ndarray:
    """Complex off-diagonal covariance entry between two antennas, ``n`` draws."""
    return sample_antenna_pair(ch, net, n, seed, workers)[:, 2].copy()


CORR_NORMALIZATIONS = ("mean", "sample")


def sample_correlation_complex(
    ch: ChannelParams,
    net: NetworkConfig,
    n: int,
    seed: int,
    mean: float | None = None,
    workers: int | None = None,
    normalization: str = "mean",
) -> np.ndarray:
    """Complex interference correlation coefficient for ``n`` realizations.

    ``normalization="mean"`` divides the off-diagonal entry by the ensemble
    mean power, ``q12 / E[q0]``. Its second moment has a closed form but the
    value is not confined to the unit disc. ``mean`` defaults to the
    infinite-field analytic mean, which does not exist at alpha == 2; pass a
    numeric mean in that case.

    ``normalization="sample"`` uses the per-realization coefficient
    ``q12 / sqrt(q11 q22)``, which always has modulus <= 1.
    """
    if normalization not in CORR_NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {CORR_NORMALIZATIONS}")
    pair = sample_antenna_pair(ch, net, n, seed, workers)
    if normalization == "sample":
        denom = np.sqrt(pair[:, 0].real * pair[:, 1].real)
        # an empty field gives 0/0; report zero correlation
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(denom > 0, pair[:, 2] / np.where(denom > 0, denom, 1.0), 0.0)

    from .moments import analytic_moments

    if mean is None:
        mean = analytic_moments(ch, net, mean_only=True).mean
    if not mean > 0:
        raise ValueError("normalizing mean must be > 0")
    return pair[:, 2] / mean


def sample_correlation_coefficient(
    ch: ChannelParams,
    net: NetworkConfig,
    n: int,
    seed: int,
    mean: float | None = None,
    workers: int | None = None,
    normalization: str = "mean",
) -> SampleSet:
    """Real part of the interference correlation coefficient.

    Only ``normalization="sample"`` guarantees values in [-1, 1].
    """
    c = sample_correlation_complex(ch, net, n, seed, mean, workers, normalization)
    r_max = resolve_r_max(ch, net)
    meta = _meta(ch, net, r_max, n, part="real", normalization=normalization)
    return SampleSet(c.real.copy(), "corr_coeff", seed, meta)


def sample_limited_terms(
    ch: ChannelParams,
    net: NetworkConfig,
    ant: SectoredAntenna,
    n: int,
    seed: int,
    workers: int | None = None,
) -> np.ndarray:
    """Per-gain-class interference powers, shape ``(n, 3)``.

    Column i holds the power from the thinned sub-field whose composite gain
    is ``ant.composite_gains[i]`` (gain included).
    """
    n = _check_n(n)
    r_max = resolve_r_max(ch, net)
    return _run_blocks(_limited_block, n, seed, (ch, net, ant, r_max), workers)


def sample_interference_power_limited(
    ch: ChannelParams,
    net: NetworkConfig,
    ant: SectoredAntenna,
    n: int,
    seed: int,
    workers: int | None = None,
) -> SampleSet:
    """Post-beamforming interference power in the directional (sectored) case."""
    terms = sample_limited_terms(ch, net, ant, n, seed, workers)
    values = terms[:, 0] + terms[:, 1] + terms[:, 2]
    r_max = resolve_r_max(ch, net)
    meta = _meta(
        ch,
        net,
        r_max,
        n,
        antenna=asdict(ant),
        gain_probabilities=list(sectored_gain_probabilities(ant)),
    )
    return SampleSet(values, "limited_power", seed, meta)
