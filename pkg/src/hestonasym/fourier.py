"""Reference Heston call pricer: Lee's Fourier inversion on a horizontal contour.

With ``k = k_r + i alpha`` and ``alpha`` inside the moment strip,

    C/S0 = R(alpha) + e^{X}/pi * int_0^inf Re( e^{i k X} phi_t(-k) / (i k - k^2) ) dk_r

where ``X = log(K/S0)`` and ``R(alpha)`` collects the residues crossed when the
line is moved past the poles at ``k = 0`` and ``k = i``.  By default the line
passes through the real saddlepoint ``p*(X/t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import heston
from .asymptotics import PricingResult, SPECIAL_BAR, SPECIAL_MINUS, regime
from .blackscholes import implied_vol
from .errors import OutsideStrip, TruncationFailure
from .heston import HestonParams
from .quadrature import adaptive_integrate

SADDLEPOINT = "saddlepoint"
LEE_DEFAULT = "lee_default"
USER = "user"

# contour levels this close to a pole are moved onto it (exact residue case)
POLE_BAND = 1e-2


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    initial_truncation: float = 200.0
    max_truncation: float = 1e5
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be > 0")
        if not 0 < self.initial_truncation <= self.max_truncation:
            raise ValueError("need 0 < initial_truncation <= max_truncation")


@dataclass(frozen=True)
class ContourChoice:
    alpha: float
    mode: str = field(default=USER)


def default_alpha(params: HestonParams, x_rate: float) -> ContourChoice:
    """Contour through the saddlepoint p*(x_rate), kept strictly inside the strip."""
    tag = regime(params, x_rate)
    if tag == SPECIAL_MINUS:
        return ContourChoice(0.0, SADDLEPOINT)
    if tag == SPECIAL_BAR:
        return ContourChoice(1.0, SADDLEPOINT)
    alpha = float(heston.saddlepoint(params, x_rate))
    margin = 1e-6 * (params.p_plus - params.p_minus)
    alpha = min(max(alpha, params.p_minus + margin), params.p_plus - margin)
    if abs(alpha) < POLE_BAND:
        alpha = 0.0
    elif abs(alpha - 1.0) < POLE_BAND:
        alpha = 1.0
    return ContourChoice(alpha, SADDLEPOINT)


def residue_terms(alpha: float, x_total):
    """Residue contribution for the contour level ``alpha``."""
    x_total = np.asarray(x_total, dtype=float)
    if alpha < 0.0:
        return -np.expm1(x_total)
    if alpha == 0.0:
        return 1.0 - 0.5 * np.exp(x_total)
    if alpha < 1.0:
        return np.ones_like(x_total)
    if alpha == 1.0:
        return np.full_like(x_total, 0.5)
    return np.zeros_like(x_total)


def _integrand(params: HestonParams, t: float, alpha: float, x_total: np.ndarray):
    def f(kr):
        k = kr + 1j * alpha
        logphi = heston.log_char_fn(params, t, -k)
        denom = 1j * k - k * k
        expo = logphi[:, None] + (1.0 - alpha) * x_total[None, :] + 1j * kr[:, None] * x_total[None, :]
        return (np.exp(expo) / denom[:, None]).real
    return f


def _integrate(params, x_total, t, alpha, quad):
    f = _integrand(params, t, alpha, x_total)
    opts = dict(abs_tol=quad.abs_tol, rel_tol=quad.rel_tol, max_subdivisions=quad.max_subdivisions)
    upper = quad.initial_truncation
    total, err, _ = adaptive_integrate(f, 0.0, upper, **opts)
    while True:
        tail, tail_err, _ = adaptive_integrate(f, upper, 2.0 * upper, **opts)
        total = total + tail
        err = err + tail_err
        tol = np.maximum(quad.abs_tol, quad.rel_tol * np.abs(total))
        if np.all(np.abs(tail) <= tol / 10.0):
            return total / math.pi, err / math.pi
        upper *= 2.0
        if upper >= quad.max_truncation:
            raise TruncationFailure(
                f"integrand still significant beyond k_r = {upper:g} (t = {t!r})"
            )


def lee_call_prices(params: HestonParams, x_total, t: float, alpha: float,
                    quad: QuadratureConfig | None = None):
    """Prices for several log-moneyness values sharing one contour level.

    Returns ``(prices, residues, integrals, errors)`` as arrays.
    """
    quad = quad or QuadratureConfig()
    if t <= 0.0:
        raise ValueError("t must be > 0")
    if not params.p_minus < alpha < params.p_plus:
        raise OutsideStrip(f"alpha={alpha!r} outside ({params.p_minus:.6g}, {params.p_plus:.6g})")
    x_total = np.atleast_1d(np.asarray(x_total, dtype=float))
    integral, err = _integrate(params, x_total, t, alpha, quad)
    residue = residue_terms(alpha, x_total)
    return residue + integral, residue, integral, err


def lee_call_result(params: HestonParams, x_total: float, t: float,
                    contour: ContourChoice | None = None,
                    quad: QuadratureConfig | None = None) -> PricingResult:
    contour = contour or default_alpha(params, x_total / t)
    price, residue, integral, err = lee_call_prices(params, [x_total], t, contour.alpha, quad)
    return PricingResult(float(price[0]), "fourier", float(residue[0]), float(integral[0]), float(err[0]))


def lee_call_price(params: HestonParams, x_total: float, t: float,
                   contour: ContourChoice | None = None,
                   quad: QuadratureConfig | None = None) -> float:
    """Normalised call price for strike S0 exp(x_total) and maturity t."""
    return lee_call_result(params, x_total, t, contour, quad).normalized_price


def exact_implied_vol(params: HestonParams, x: float, t: float, convention: str = "rate",
                      contour: ContourChoice | None = None,
                      quad: QuadratureConfig | None = None) -> float:
    """Black-Scholes implied volatility of the Fourier price.

    ``convention='rate'`` reads ``x`` as log(K/S0)/t; ``'total'`` as log(K/S0).
    """
    if convention == "rate":
        x_total = x * t
    elif convention == "total":
        x_total = x
    else:
        raise ValueError(f"unknown strike convention {convention!r}")
    price = lee_call_price(params, x_total, t, contour, quad)
    return implied_vol(price, x_total, t)
