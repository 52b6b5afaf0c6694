"""Polynomial laws for mixture parameters and the shipped coefficient table.

A :class:`PolyCoeffs` maps a channel feature ``x`` (shadowing std-dev in dB,
or path-loss exponent) to a parameter ``theta``, either as
``log10(theta) = sum_i a_i x**i`` or, for the w1 and c laws in the
path-loss exponent, as ``theta = sum_i a_i x**i`` directly.

The table coefficients are kept as decimal strings and scaled with
:class:`decimal.Decimal`, so a coefficient printed as ``-433.55`` (x 1e3)
becomes the double nearest to ``-0.43355`` with no intermediate rounding.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from importlib import resources

import numpy as np

from .heavytail_dist import IGParams, IWParams, MixtureParams
from .specfun import gamma

TARGETS = ("w1", "c", "lambda", "mu")
VARIABLES = ("sigma_sf", "alpha")
SIGMA_DEGREE = 3
ALPHA_DEGREES = {"w1": 4, "c": 4, "lambda": 3}
ALPHA_LOG10 = {"w1": False, "c": False, "lambda": True}


class TableRangeError(ValueError):
    """Requested point is outside what the coefficient table supports."""


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial law ``theta(x)``; ``coeffs`` are ascending, ``a_0`` first."""

    target: str
    variable: str
    coeffs: tuple
    log10: bool = True
    valid_range: tuple | None = None
    eta: float = 1.0
    p_ref_dbm: float = 30.0

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown variable {self.variable!r}")
        if len(self.coeffs) < 1:
            raise ValueError("at least one coefficient required")
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def polynomial(self, x):
        # Horner, highest power first; at x == 0 this returns a_0 exactly
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return float(acc) if acc.ndim == 0 else acc

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "variable": self.variable,
            "coeffs": list(self.coeffs),
            "log10": self.log10,
            "valid_range": list(self.valid_range) if self.valid_range else None,
            "eta": self.eta,
            "p_ref_dbm": self.p_ref_dbm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolyCoeffs":
        vr = d.get("valid_range")
        return cls(
            d["target"],
            d["variable"],
            tuple(d["coeffs"]),
            bool(d.get("log10", True)),
            tuple(vr) if vr else None,
            float(d.get("eta", 1.0)),
            float(d.get("p_ref_dbm", 30.0)),
        )


def eval_param_function(pc: PolyCoeffs, x):
    """theta at ``x``; warns when ``x`` leaves the validity range."""
    if pc.valid_range is not None:
        lo, hi = pc.valid_range
        if np.any(np.asarray(x) < lo) or np.any(np.asarray(x) > hi):
            warnings.warn(
                f"{pc.variable}={x} outside the fitted range [{lo}, {hi}]", RuntimeWarning, stacklevel=2
            )
    y = pc.polynomial(x)
    return 10.0**y if pc.log10 else y


def _least_squares(x, y, degree):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("grid must be a list of (x, theta) pairs")
    if len(np.unique(x)) < degree + 1:
        raise ValueError(f"degree {degree} needs at least {degree + 1} distinct grid points")
    # scale x to [-1, 1] for conditioning, then map the coefficients back
    lo, hi = float(x.min()), float(x.max())
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    t = (x - mid) / half
    design = np.vander(t, degree + 1, increasing=True)
    sol, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < degree + 1:
        raise np.linalg.LinAlgError("rank-deficient design matrix")
    # expand sum_k s_k ((x - mid) / half)**k into powers of x
    poly = np.polynomial.Polynomial(sol)
    shifted = poly(np.polynomial.Polynomial([-mid / half, 1.0 / half]))
    coeffs = np.zeros(degree + 1)
    coeffs[: len(shifted.coef)] = shifted.coef
    return tuple(coeffs)


def _split_grid(grid):
    pairs = [(float(a), float(b)) for a, b in grid]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def fit_sigma_polynomial(grid, target: str = "w1", degree: int = SIGMA_DEGREE, **kw) -> PolyCoeffs:
    """Least-squares cubic in sigma_sf for ``log10(theta)``."""
    x, theta = _split_grid(grid)
    if np.any(np.asarray(theta) <= 0):
        raise ValueError("log10 fit needs positive parameter values")
    coeffs = _least_squares(x, np.log10(theta), degree)
    return PolyCoeffs(target, "sigma_sf", coeffs, True, (min(x), max(x)), **kw)


def fit_alpha_polynomial(grid, target: str, degree: int | None = None, **kw) -> PolyCoeffs:
    """Least-squares law in alpha: quartic for w1 and c, cubic for log10(lambda)."""
    if target not in ALPHA_DEGREES:
        raise ValueError(f"no alpha law for target {target!r}")
    expected = ALPHA_DEGREES[target]
    if degree is not None and degree != expected:
        raise ValueError(f"alpha law for {target} has degree {expected}, not {degree}")
    x, theta = _split_grid(grid)
    log10 = ALPHA_LOG10[target]
    if log10:
        if np.any(np.asarray(theta) <= 0):
            raise ValueError("log10 fit needs positive parameter values")
        theta = np.log10(theta)
    coeffs = _least_squares(x, theta, expected)
    return PolyCoeffs(target, "alpha", coeffs, log10, (min(x), max(x)), **kw)


# --------------------------------------------------------------------------
# shipped table


@lru_cache(maxsize=1)
def load_table1() -> dict:
    """Parsed coefficient table: ``{target: {alpha: PolyCoeffs}}`` plus metadata."""
    raw = json.loads(resources.files("cellinterf").joinpath("data/table1.json").read_text())
    scale = Decimal(raw["scale"])
    order = raw["order"]
    if order != ["a3", "a2", "a1", "a0"]:
        raise ValueError("unexpected coefficient order in table file")
    table = {}
    for target, rows in raw["targets"].items():
        table[target] = {}
        for alpha, printed in rows.items():
            ascending = tuple(float(Decimal(v) * scale) for v in reversed(printed))
            table[target][float(alpha)] = PolyCoeffs(
                target,
                "sigma_sf",
                ascending,
                True,
                tuple(raw["valid_range"]),
                float(raw["eta"]),
                float(raw["p_ref_dbm"]),
            )
    return {"raw": raw, "coeffs": table}


def table_alphas() -> tuple:
    return tuple(sorted(load_table1()["coeffs"]["w1"]))


def power_scale(p_tx_dbm: float, p_ref_dbm: float = 30.0) -> float:
    return 10.0 ** (0.1 * (p_tx_dbm - p_ref_dbm))


def _table_values(alpha, sigma_sf_db, interpolate):
    coeffs = load_table1()["coeffs"]
    alphas = table_alphas()
    if alpha in alphas:
        return {t: eval_param_function(coeffs[t][alpha], sigma_sf_db) for t in TARGETS}
    if not interpolate:
        raise TableRangeError(f"alpha={alpha} is not a table row {alphas}; pass interpolate=True")
    if not alphas[0] < alpha < alphas[-1]:
        raise TableRangeError(f"alpha={alpha} outside [{alphas[0]}, {alphas[-1]}]")
    hi = next(a for a in alphas if a > alpha)
    lo = max(a for a in alphas if a < alpha)
    frac = (alpha - lo) / (hi - lo)
    out = {}
    for t in TARGETS:
        # interpolate the exponent, i.e. geometric interpolation of theta
        y_lo = coeffs[t][lo].polynomial(sigma_sf_db)
        y_hi = coeffs[t][hi].polynomial(sigma_sf_db)
        out[t] = 10.0 ** ((1.0 - frac) * y_lo + frac * y_hi)
    return out


def table1_lookup(
    alpha: float, sigma_sf_db: float, p_tx_dbm: float = 30.0, interpolate: bool = False
) -> MixtureParams:
    """Mixture parameters from the shipped table.

    ``b`` follows from the tied mean ``mu = b Gamma(1 - 1/c)``. Transmit power
    rescales ``b``, ``lam`` and ``mu`` by ``10**(0.1 (P - 30))`` and leaves
    ``c`` alone. Raises :class:`TableRangeError` when the polynomials leave
    the parameter domain (w1 > 1 or c <= 1).
    """
    vals = _table_values(float(alpha), float(sigma_sf_db), interpolate)
    w1, c = vals["w1"], vals["c"]
    if not 0.0 <= w1 <= 1.0:
        raise TableRangeError(f"table gives w1={w1:.6g} at alpha={alpha}, sigma={sigma_sf_db} dB")
    if not c > 1.0:
        raise TableRangeError(f"table gives c={c:.6g} <= 1 at alpha={alpha}, sigma={sigma_sf_db} dB")
    ref = load_table1()["raw"]["p_ref_dbm"]
    k = power_scale(p_tx_dbm, ref)
    mu = vals["mu"]
    b = mu / gamma(1.0 - 1.0 / c)
    return MixtureParams(w1, IGParams(k * mu, k * vals["lambda"]), IWParams(k * b, c))
