"""Large-maturity expansions of Heston call prices and implied volatility.

Two strike conventions appear here:

* rate convention, strike ``S0 exp(x t)``: the smile converges to
  ``sigma_inf_sq(x)`` with correction ``a1_hat(x)/t``;
* total convention, strike ``S0 exp(x)``: the smile flattens to ``8 V*(0)``
  with correction ``a1_fixed(x)/t``.

``x = -theta/2`` and ``x = thetabar/2`` are special: the generic amplitude has
a pole there.  Inputs within ``SNAP_TOL`` of either point are routed to the
special-value branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import heston
from .blackscholes import a_bs, indicator_residue
from .errors import AmplitudeRatioNonPositive, NonPositiveResult
from .heston import HestonParams

SNAP_TOL = 1e-9

GENERAL = "general"
SPECIAL_MINUS = "special_minus_theta_half"
SPECIAL_BAR = "special_theta_bar_half"


def regime(params: HestonParams, x: float) -> str:
    if abs(x + 0.5 * params.theta) < SNAP_TOL:
        return SPECIAL_MINUS
    if abs(x - 0.5 * params.theta_bar) < SNAP_TOL:
        return SPECIAL_BAR
    return GENERAL


def _snap(params: HestonParams, x: float) -> tuple[float, str]:
    tag = regime(params, x)
    if tag == SPECIAL_MINUS:
        return -0.5 * params.theta, tag
    if tag == SPECIAL_BAR:
        return 0.5 * params.theta_bar, tag
    return x, tag


def _sgn(x: float) -> float:
    return 1.0 if x > 0.0 else -1.0


@dataclass(frozen=True)
class _SmileParts:
    s2: float           # sigma_inf^2(x)
    x_minus: float      # x - s2/2
    x_plus: float       # x + s2/2


def _smile_parts(params: HestonParams, st: heston.SaddleState) -> _SmileParts:
    # with a = sqrt(V*), b = sqrt(V* - x):  x = a^2 - b^2, and
    # inside (-theta/2, thetabar/2):  s2/2 = (a + b)^2
    # outside:                        s2/2 = (a - b)^2 = (x / (a + b))^2
    a = math.sqrt(st.v_star)
    b = math.sqrt(st.v_star_minus_x)
    x = st.x
    if -0.5 * params.theta < x < 0.5 * params.theta_bar:
        half = (a + b) ** 2
        return _SmileParts(2.0 * half, -2.0 * b * (a + b), 2.0 * a * (a + b))
    amb = x / (a + b)
    return _SmileParts(2.0 * amb * amb, 2.0 * b * amb, 2.0 * a * amb)


# --------------------------------------------------------------------------
# amplitude

def amplitude_general(params: HestonParams, x: float) -> float:
    """Generic branch U(p*)/(p*(p*-1) sqrt(V''(p*))); singular at the special points."""
    st = heston.saddle_state(params, x)
    _, v2, _ = heston.cgf_derivatives(params, st.p)
    u = heston.u_fn(params, st.p)
    return float(u / (st.p * st.p_minus_one * math.sqrt(v2)))


def amplitude_special(params: HestonParams, which: str) -> float:
    x = -0.5 * params.theta if which == SPECIAL_MINUS else 0.5 * params.theta_bar
    p = 0.0 if which == SPECIAL_MINUS else 1.0
    _, v2, v3 = heston.cgf_derivatives(params, p)
    up = heston.u_prime(params, p)
    return float((-1.0 - _sgn(x) * (v3 / (6.0 * v2) - up)) / math.sqrt(v2))


def amplitude_A(params: HestonParams, x: float) -> float:
    """Prefactor of the (2 pi t)^{-1/2} term in the large-t call expansion."""
    x, tag = _snap(params, float(x))
    if tag == GENERAL:
        return amplitude_general(params, x)
    return amplitude_special(params, tag)


# --------------------------------------------------------------------------
# prices

@dataclass(frozen=True)
class PricingResult:
    normalized_price: float
    method: str
    residue_part: float
    correction_part: float
    error_estimate: float | None = None

    def as_dict(self) -> dict:
        return {
            "normalized_price": self.normalized_price,
            "method": self.method,
            "residue_part": self.residue_part,
            "correction_part": self.correction_part,
            "error_estimate": self.error_estimate,
        }


def call_price_asymptotic(params: HestonParams, x: float, t: float) -> PricingResult:
    """Two-term large-t price of the call with strike S0 exp(x t)."""
    if t <= 0.0:
        raise ValueError("t must be > 0")
    x, _ = _snap(params, float(x))
    residue = indicator_residue(x, t, -0.5 * params.theta, 0.5 * params.theta_bar).value
    st = heston.saddle_state(params, x)
    correction = math.exp(-st.v_star_minus_x * t) * amplitude_A(params, x) / math.sqrt(2.0 * math.pi * t)
    return PricingResult(residue + correction, "asymptotic", residue, correction)


def call_price_fixed_strike_asymptotic(params: HestonParams, x_total: float, t: float) -> PricingResult:
    """Two-term large-t price of the call with fixed strike S0 exp(x_total)."""
    if t <= 0.0:
        raise ValueError("t must be > 0")
    st = heston.saddle_state(params, 0.0)
    correction = amplitude_A(params, 0.0) / math.sqrt(2.0 * math.pi * t) * math.exp(
        (1.0 - st.p) * x_total - st.v_star * t
    )
    return PricingResult(1.0 + correction, "asymptotic", 1.0, correction)


# --------------------------------------------------------------------------
# implied volatility, rate convention

@dataclass(frozen=True)
class AsymptoticSmilePoint:
    x: float
    sigma_inf_sq: float
    a1_hat: float
    regime: str


def sigma_inf_sq(params: HestonParams, x: float) -> float:
    """Limiting implied variance for strikes S0 exp(x t)."""
    st = heston.saddle_state(params, float(x))
    return _smile_parts(params, st).s2


def a1_hat(params: HestonParams, x: float) -> float:
    """First-order correction: sigma_t^2(x) ~ sigma_inf_sq(x) + a1_hat(x)/t."""
    x, tag = _snap(params, float(x))
    st = heston.saddle_state(params, x)
    parts = _smile_parts(params, st)
    if tag != GENERAL:
        p = 0.0 if tag == SPECIAL_MINUS else 1.0
        _, v2, v3 = heston.cgf_derivatives(params, p)
        up = heston.u_prime(params, p)
        s = math.sqrt(parts.s2)
        return float(2.0 * (1.0 - s / math.sqrt(v2) * (1.0 + _sgn(x) * (v3 / (6.0 * v2) - up))))
    ratio = amplitude_ratio(params, x, st=st, parts=parts)
    # x^2/s^4 - 1/4 = (x - s2/2)(x + s2/2)/s2^2
    return 2.0 * parts.s2 ** 2 * math.log(ratio) / (parts.x_minus * parts.x_plus)


def amplitude_ratio(params: HestonParams, x: float, *, st=None, parts=None) -> float:
    """A(x) / A_BS(x, sigma_inf(x), 0) on the generic branch."""
    if st is None:
        st = heston.saddle_state(params, float(x))
    if parts is None:
        parts = _smile_parts(params, st)
    _, v2, _ = heston.cgf_derivatives(params, st.p)
    u = float(heston.u_fn(params, st.p))
    s3 = parts.s2 ** 1.5
    # A_BS(x, s, 0) = s^3 / ((x - s2/2)(x + s2/2)); both poles cancel in the ratio
    ratio = (u / (st.p * math.sqrt(v2))) * (parts.x_minus / st.p_minus_one) * parts.x_plus / s3
    if not ratio > 0.0:
        raise AmplitudeRatioNonPositive(f"A/A_BS = {ratio!r} at x = {x!r}")
    return ratio


def smile_point(params: HestonParams, x: float) -> AsymptoticSmilePoint:
    x = float(x)
    return AsymptoticSmilePoint(x, sigma_inf_sq(params, x), a1_hat(params, x), regime(params, x))


def implied_var_asymptotic(params: HestonParams, x: float, t: float) -> float:
    if t <= 0.0:
        raise ValueError("t must be > 0")
    value = sigma_inf_sq(params, x) + a1_hat(params, x) / t
    if not value > 0.0:
        raise NonPositiveResult(f"two-term implied variance {value!r} <= 0 at x={x!r}, t={t!r}")
    return value


# --------------------------------------------------------------------------
# implied volatility, total convention

@dataclass(frozen=True)
class FixedStrikeSmilePoint:
    x_total: float
    level: float
    a1: float


def fixed_strike_level(params: HestonParams) -> float:
    """8 V*(0), the flat long-maturity implied variance for fixed strikes."""
    return 8.0 * heston.saddle_state(params, 0.0).v_star


def a1_fixed(params: HestonParams, x_total: float) -> float:
    """Correction in sigma_t^2(x) ~ 8 V*(0) + a1(x)/t for fixed strikes.

    The constant is chosen so that the Black-Scholes fixed-strike expansion
    with variance 8 V*(0) reproduces the Heston one: -A(0) sqrt(V*(0)/2) plays
    the role of 2/sigma * sigma/2 = 1, which makes a1 vanish in the
    Black-Scholes case (A(0) = -4/sigma).
    """
    st = heston.saddle_state(params, 0.0)
    a0 = amplitude_A(params, 0.0)
    return -8.0 * math.log(-a0 * math.sqrt(0.5 * st.v_star)) + 4.0 * (2.0 * st.p - 1.0) * x_total


def fixed_strike_point(params: HestonParams, x_total: float) -> FixedStrikeSmilePoint:
    return FixedStrikeSmilePoint(float(x_total), fixed_strike_level(params), a1_fixed(params, x_total))


def implied_var_fixed_strike(params: HestonParams, x_total: float, t: float) -> float:
    if t <= 0.0:
        raise ValueError("t must be > 0")
    value = fixed_strike_level(params) + a1_fixed(params, x_total) / t
    if not value > 0.0:
        raise NonPositiveResult(f"two-term implied variance {value!r} <= 0 at x={x_total!r}, t={t!r}")
    return value
