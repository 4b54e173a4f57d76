"""Black-Scholes analytics with zero rates, normalised by spot.

Includes the implied-volatility inversion used as an oracle throughout, the
Black-Scholes limiting cgf / rate function / saddlepoint, and the two
large-maturity expansions (maturity-scaled strike and fixed strike).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import (
    NoConvergence,
    NonPositiveEffectiveVariance,
    NonPositiveInput,
    NonPositiveSigma,
    PriceOutOfBounds,
    ThresholdOrder,
)

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def norm_cdf(z):
    """Gaussian cdf through erfc, so both tails keep relative precision."""
    return 0.5 * erfc(-np.asarray(z, dtype=float) / _SQRT2)


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / _SQRT2PI


def _call_from_total(x_total, t, vol):
    sd = vol * np.sqrt(t)
    d1 = -x_total / sd + 0.5 * sd
    return norm_cdf(d1) - np.exp(x_total) * norm_cdf(d1 - sd)


def bs_call(spot, strike, t, vol):
    """Normalised call price C/S0 with zero rates."""
    for name, value in (("spot", spot), ("strike", strike), ("t", t), ("vol", vol)):
        if np.any(np.asarray(value) <= 0.0):
            raise NonPositiveInput(f"{name} must be > 0")
    x_total = np.log(np.asarray(strike, dtype=float) / np.asarray(spot, dtype=float))
    return _call_from_total(x_total, t, vol)


def bs_call_total(x_total, t, vol):
    """Same as :func:`bs_call` but with the strike given as log(K/S0)."""
    if np.any(np.asarray(t) <= 0.0) or np.any(np.asarray(vol) <= 0.0):
        raise NonPositiveInput("t and vol must be > 0")
    return _call_from_total(np.asarray(x_total, dtype=float), t, vol)


def bs_vega_total(x_total, t, vol):
    sd = vol * math.sqrt(t)
    d1 = -x_total / sd + 0.5 * sd
    return float(norm_pdf(d1)) * math.sqrt(t)


def implied_vol(normalized_price: float, x_total: float, t: float,
                max_iter: int = 200) -> float:
    """Invert :func:`bs_call_total` for the volatility.

    Brackets a sign change, then runs Newton steps with the analytic vega,
    falling back to bisection whenever a step leaves the bracket.
    """
    price = float(normalized_price)
    x_total = float(x_total)
    if t <= 0.0:
        raise NonPositiveInput("t must be > 0")
    intrinsic = max(0.0, -math.expm1(x_total))
    if not (intrinsic < price < 1.0):
        raise PriceOutOfBounds(
            f"price {price!r} outside ({intrinsic!r}, 1) for log-moneyness {x_total!r}"
        )

    if x_total < 0.0:
        # in the money: match the put (time value) so nothing cancels
        target = price + math.expm1(x_total)
        ex = math.exp(x_total)

        def f(v):
            sd = v * math.sqrt(t)
            d1 = -x_total / sd + 0.5 * sd
            return float(ex * norm_cdf(sd - d1) - norm_cdf(-d1)) - target
    else:
        def f(v):
            return float(_call_from_total(x_total, t, v)) - price

    lo, hi = 1e-8, 1.0
    while f(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e4:
            raise NoConvergence("could not bracket the implied volatility")
    if f(lo) > 0.0:
        # price too close to intrinsic for the lower guess; shrink
        while f(lo) > 0.0:
            lo *= 0.5
            if lo < 1e-300:
                raise NoConvergence("could not bracket the implied volatility")

    v = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fv = f(v)
        if fv == 0.0:
            return v
        if fv > 0.0:
            hi = v
        else:
            lo = v
        if hi - lo <= 4e-16 * hi:
            return v
        vega = bs_vega_total(x_total, t, v)
        step = v - fv / vega if vega > 0.0 else lo - 1.0
        if lo < step < hi:
            if abs(step - v) <= 1e-15 * v:
                return step
            v = step
        else:
            v = 0.5 * (lo + hi)
    raise NoConvergence(f"implied vol did not converge in {max_iter} iterations")


# --------------------------------------------------------------------------
# large-maturity machinery

@dataclass(frozen=True)
class PiecewiseResidue:
    x: float
    t: float
    a: float
    b: float
    value: float


def indicator_residue(x: float, t: float, a: float, b: float) -> PiecewiseResidue:
    """Leading (residue) term of the large-t call expansions.

    ``(1 - e^{xt})`` below ``a``, ``1 - e^{at}`` at ``a``, 1 strictly between,
    1/2 at ``b`` and 0 above.  Knife edges use exact float comparison.
    """
    if not a < b:
        raise ThresholdOrder(f"need a < b, got a={a!r}, b={b!r}")
    if x < a:
        value = -math.expm1(x * t)
    elif x == a:
        value = -math.expm1(a * t)
    elif x < b:
        value = 1.0
    elif x == b:
        value = 0.5
    else:
        value = 0.0
    return PiecewiseResidue(x, t, a, b, value)


def _check_sigma(sigma):
    if np.any(np.asarray(sigma) <= 0.0):
        raise NonPositiveSigma("sigma must be > 0")


def bs_cgf(p, sigma):
    _check_sigma(sigma)
    p = np.asarray(p, dtype=float)
    return p * (p - 1.0) * sigma * sigma / 2.0


def bs_rate(x, sigma):
    _check_sigma(sigma)
    x = np.asarray(x, dtype=float)
    s2 = sigma * sigma
    return (x + s2 / 2.0) ** 2 / (2.0 * s2)


def bs_saddle(x, sigma):
    _check_sigma(sigma)
    s2 = sigma * sigma
    return (np.asarray(x, dtype=float) + s2 / 2.0) / s2


def a_bs(x: float, sigma: float, a1: float) -> float:
    """Black-Scholes amplitude; the pole at x = +-sigma^2/2 is replaced by
    its special value (a1/2 - 1)/sigma."""
    s2 = sigma * sigma
    if x == s2 / 2.0 or x == -s2 / 2.0:
        return (a1 / 2.0 - 1.0) / sigma
    return math.exp(a1 * (4.0 * x * x / (s2 * s2) - 1.0) / 8.0) * sigma ** 3 / (x * x - s2 * s2 / 4.0)


def _check_effective_variance(sigma, a1, t):
    if sigma <= 0.0:
        raise NonPositiveSigma("sigma must be > 0")
    if not sigma * sigma + a1 / t > 0.0:
        raise NonPositiveEffectiveVariance(
            f"sigma^2 + a1/t = {sigma * sigma + a1 / t!r} must be > 0"
        )


def bs_call_large_time(x: float, t: float, sigma: float, a1: float) -> float:
    """Two-term large-t expansion of the call with strike S0 exp(xt) and
    volatility sqrt(sigma^2 + a1/t)."""
    _check_effective_variance(sigma, a1, t)
    s2 = sigma * sigma
    residue = indicator_residue(x, t, -s2 / 2.0, s2 / 2.0).value
    excess = float(bs_rate(x, sigma)) - x
    return residue + a_bs(x, sigma, a1) / math.sqrt(2.0 * math.pi * t) * math.exp(-excess * t)


def bs_call_fixed_strike_large_time(x_total: float, t: float, sigma: float, a1: float) -> float:
    """Two-term large-t expansion of the call with fixed strike S0 exp(x_total)."""
    _check_effective_variance(sigma, a1, t)
    return 1.0 - 2.0 * math.sqrt(2.0) / (sigma * math.sqrt(math.pi * t)) * math.exp(
        -sigma * sigma * t / 8.0 + x_total / 2.0 - a1 / 8.0
    )
