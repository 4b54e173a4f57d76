"""Heston model building blocks.

Log-price ``X_t`` with zero rates and dividends; the variance is a CIR process
with mean reversion ``kappa`` towards ``theta``, vol-of-vol ``sigma``,
correlation ``rho`` with the stock driver and initial value ``y0``.

Everything in this module is closed form.  Functions accept scalars or numpy
arrays.  Differences that vanish at the special points (``V(0) = V(1) = 0``,
``V*(-theta/2) = 0``, ``V*(thetabar/2) = thetabar/2``) are computed in
rationalised form so that they keep full relative precision near those points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CorrelationOutOfRange,
    DegenerateDenominator,
    KappaBarNonPositive,
    LogBranchFailure,
    NonPositiveParam,
    OutsideMomentDomain,
    OutsideStrip,
)

# log argument guard band for the characteristic function
_LOG_MODULUS_FLOOR = 1e-14
_LOG_CUT_BAND = 1e-12


@dataclass(frozen=True)
class HestonParams:
    kappa: float
    theta: float
    sigma: float
    rho: float
    y0: float

    def __post_init__(self):
        for name in ("kappa", "theta", "sigma", "y0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise NonPositiveParam(f"{name} must be finite and > 0, got {value!r}")
        if not (math.isfinite(self.rho) and abs(self.rho) < 1.0):
            raise CorrelationOutOfRange(f"|rho| must be < 1, got {self.rho!r}")
        if not self.kappa - self.rho * self.sigma > 0.0:
            raise KappaBarNonPositive(
                f"kappa - rho*sigma = {self.kappa - self.rho * self.sigma!r} must be > 0"
            )

    @property
    def kappa_bar(self) -> float:
        return self.kappa - self.rho * self.sigma

    @property
    def rho_bar(self) -> float:
        return math.sqrt(1.0 - self.rho * self.rho)

    @property
    def theta_bar(self) -> float:
        return self.kappa * self.theta / self.kappa_bar

    @property
    def eta(self) -> float:
        k, s, r = self.kappa, self.sigma, self.rho
        return math.sqrt(s * s + 4.0 * k * k - 4.0 * k * r * s)

    @property
    def p_minus(self) -> float:
        return self._moment_bounds()[0]

    @property
    def p_plus(self) -> float:
        return self._moment_bounds()[1]

    def _moment_bounds(self) -> tuple[float, float]:
        # roots of kappa^2 + sigma*(sigma - 2 kappa rho) p - sigma^2 rhobar^2 p^2;
        # take the root free of cancellation and recover the other from the product
        k, s = self.kappa, self.sigma
        b = s - 2.0 * k * self.rho
        denom = 2.0 * s * (1.0 - self.rho * self.rho)
        product = -k * k / (s * s * (1.0 - self.rho * self.rho))
        if b >= 0.0:
            upper = (b + self.eta) / denom
            return product / upper, upper
        lower = (b - self.eta) / denom
        return lower, product / lower

    def as_dict(self) -> dict[str, float]:
        return {"kappa": self.kappa, "theta": self.theta, "sigma": self.sigma,
                "rho": self.rho, "y0": self.y0}


def validate_params(kappa, theta, sigma, rho, y0) -> HestonParams:
    """Build a :class:`HestonParams`, raising a named ``InvalidParams`` subclass
    for the first standing assumption that fails."""
    return HestonParams(float(kappa), float(theta), float(sigma), float(rho), float(y0))


# --------------------------------------------------------------------------
# complex helpers

def _clog1p(z):
    """Principal log(1 + z), accurate for small |z| (numpy's complex log1p is not)."""
    z = np.asarray(z, dtype=complex)
    re = 0.5 * np.log1p(2.0 * z.real + (z.real * z.real + z.imag * z.imag))
    im = np.arctan2(z.imag, 1.0 + z.real)
    return re + 1j * im


def _cexpm1(z):
    z = np.asarray(z, dtype=complex)
    a, b = z.real, z.imag
    half = np.sin(0.5 * b)
    re = np.expm1(a) * np.cos(b) - 2.0 * half * half
    return re + 1j * np.exp(a) * np.sin(b)


# --------------------------------------------------------------------------
# d, g and the complex limiting cgf

def d_fn(params: HestonParams, k):
    """Principal square root of (kappa - i rho sigma k)^2 + sigma^2 (i k + k^2)."""
    k = np.asarray(k, dtype=complex)
    beta = params.kappa - 1j * params.rho * params.sigma * k
    return np.sqrt(beta * beta + params.sigma ** 2 * (1j * k + k * k))


def g_fn(params: HestonParams, k):
    k = np.asarray(k, dtype=complex)
    beta = params.kappa - 1j * params.rho * params.sigma * k
    d = d_fn(params, k)
    denom = beta + d
    if np.any(np.abs(denom) <= 1e-14 * (np.abs(beta) + np.abs(d))):
        raise DegenerateDenominator("kappa - i rho sigma k + d(k) vanishes")
    # (beta - d)(beta + d) = beta^2 - d^2 = -sigma^2 (i k + k^2)
    return -params.sigma ** 2 * (1j * k + k * k) / (denom * denom)


def limiting_cgf_c(params: HestonParams, p):
    """Analytic continuation of V to complex p (so V(ik) enters phi_t(k))."""
    p = np.asarray(p, dtype=complex)
    k = -1j * p
    beta = params.kappa - params.rho * params.sigma * p
    d = d_fn(params, k)
    return params.kappa * params.theta * p * (p - 1.0) / (beta + d)


# --------------------------------------------------------------------------
# real-line quantities on (p-, p+)

def _check_domain(params: HestonParams, p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > params.p_minus) & (p < params.p_plus))):
        raise OutsideMomentDomain(
            f"p must lie in ({params.p_minus:.6g}, {params.p_plus:.6g})"
        )
    return p


def _radicand(params: HestonParams, p):
    k, s, r = params.kappa, params.sigma, params.rho
    return k * k + s * (s - 2.0 * k * r) * p - s * s * (1.0 - r * r) * p * p


def _radicand_prime(params: HestonParams, p):
    k, s, r = params.kappa, params.sigma, params.rho
    return s * (s - 2.0 * k * r) - 2.0 * s * s * (1.0 - r * r) * p


def _real_d(params: HestonParams, p):
    return np.sqrt(_radicand(params, p))


def limiting_cgf(params: HestonParams, p):
    """V(p) = kappa theta / sigma^2 (kappa - rho sigma p - d(-ip)) on (p-, p+)."""
    p = _check_domain(params, p)
    beta = params.kappa - params.rho * params.sigma * p
    return params.kappa * params.theta * p * (p - 1.0) / (beta + _real_d(params, p))


def cgf_derivatives(params: HestonParams, p):
    """Return (V', V'', V''') at p, from the closed form of V."""
    p = _check_domain(params, p)
    kt = params.kappa * params.theta
    s = params.sigma
    D = _real_d(params, p)
    q1 = _radicand_prime(params, p)
    eta2 = params.eta ** 2
    v1 = -kt / (s * s) * (params.rho * s + 0.5 * q1 / D)
    v2 = kt * eta2 / (4.0 * D ** 3)
    v3 = -3.0 * kt * eta2 * q1 / (8.0 * D ** 5)
    return v1, v2, v3


def _log_u(params: HestonParams, p):
    kt = params.kappa * params.theta
    beta = params.kappa - params.rho * params.sigma * p
    D = _real_d(params, p)
    V = kt * p * (p - 1.0) / (beta + D)
    # 2D/(beta+D) = 1 + (D-beta)/(beta+D), and D - beta = sigma^2 p(1-p)/(beta+D)
    base_log = np.log1p(params.sigma ** 2 * p * (1.0 - p) / (beta + D) ** 2)
    return 2.0 * kt / params.sigma ** 2 * base_log + params.y0 / kt * V


def u_fn(params: HestonParams, p):
    """U(p), the time-independent prefactor in the large-t form of phi_t."""
    p = _check_domain(params, p)
    return np.exp(_log_u(params, p))


def u_prime(params: HestonParams, p):
    p = _check_domain(params, p)
    kt = params.kappa * params.theta
    rs = params.rho * params.sigma
    beta = params.kappa - rs * p
    D = _real_d(params, p)
    v1 = cgf_derivatives(params, p)[0]
    dlog = kt * (beta * (1.0 - 2.0 * p) + 2.0 * rs * p * (1.0 - p)) / (D * D * (beta + D))
    dlog = dlog + params.y0 / kt * v1
    return np.exp(_log_u(params, p)) * dlog


# --------------------------------------------------------------------------
# saddlepoint and rate function

def _saddle_pieces(params: HestonParams, x):
    k, t, s, r = params.kappa, params.theta, params.sigma, params.rho
    w = x * s + k * t * r
    c = k * t * params.rho_bar
    # (x sigma + kappa theta rho)^2 + kappa^2 theta^2 rhobar^2 > 0 for all x
    root = np.hypot(w, c)
    return w, c, root


def saddlepoint(params: HestonParams, x):
    """p*(x), the unique solution of V'(p) = x in (p-, p+)."""
    x = np.asarray(x, dtype=float)
    w, _, root = _saddle_pieces(params, x)
    b = params.sigma - 2.0 * params.kappa * params.rho
    return (b + w * params.eta / root) / (2.0 * params.sigma * params.rho_bar ** 2)


def saddle_offset(params: HestonParams, x, x0):
    """p*(x) - p*(x0) without cancellation when x is close to x0."""
    x = np.asarray(x, dtype=float)
    w, c, root = _saddle_pieces(params, x)
    w0, _, root0 = _saddle_pieces(params, np.asarray(x0, dtype=float))
    scale = params.eta / (2.0 * params.sigma * params.rho_bar ** 2)
    cross = w * root0 + w0 * root
    same_sign = w * w0 > 0.0
    safe = np.where(same_sign, cross, 1.0)
    close = c * c * params.sigma * (x - x0) * (w + w0) / (root * root0 * safe)
    direct = w / root - w0 / root0
    return scale * np.where(same_sign, close, direct)


@dataclass(frozen=True)
class SaddleState:
    """Saddlepoint quantities at one x, with the small differences kept exact."""

    x: float
    p: float
    p_minus_one: float
    v_star: float
    v_star_minus_x: float


def saddle_state(params: HestonParams, x) -> SaddleState:
    x = float(x)
    lo, hi = -0.5 * params.theta, 0.5 * params.theta_bar
    if abs(x - hi) < abs(x - lo):
        pm1 = float(saddle_offset(params, x, hi))
        p = 1.0 + pm1
    else:
        p = float(saddle_offset(params, x, lo))
        pm1 = p - 1.0
    k, s, rs = params.kappa, params.sigma, params.rho * params.sigma
    kt = k * params.theta
    sb = s * (s - 2.0 * k * params.rho)
    s2rb2 = s * s * params.rho_bar ** 2
    kb = params.kappa_bar
    D = math.sqrt(_radicand(params, p))
    denom = k - rs * p + D
    # V* = p x - V(p) with V(p) = kt p (p-1) / denom, factored two ways:
    #   V*     = p     * [(x - lo) - (kt (p-1)/denom + theta/2)]
    #   V* - x = (p-1) * [(x - hi) - (kt p/denom - thetabar/2)]
    # and each inner difference is rewritten in terms of p or p-1 directly.
    d_minus_k = p * (sb - s2rb2 * p) / (D + k)
    h0 = kt * ((2.0 * k - rs) * p + d_minus_k) / (2.0 * k * denom)
    v_star = p * ((x - lo) - h0)
    d_minus_kb = pm1 * (sb - s2rb2 * (p + 1.0)) / (D + kb)
    h1 = kt * ((2.0 * kb + rs) * pm1 - d_minus_kb) / (2.0 * kb * denom)
    excess = pm1 * ((x - hi) - h1)
    return SaddleState(x, p, pm1, max(v_star, 0.0), max(excess, 0.0))


@dataclass(frozen=True)
class RateFunctionPoint:
    x: float
    p_star: float
    v_star: float
    v2: float
    v3: float
    v_star_minus_x: float


def rate_function(params: HestonParams, x) -> RateFunctionPoint:
    """Fenchel-Legendre transform V*(x) = p*(x) x - V(p*(x)) with V'', V''' at p*."""
    st = saddle_state(params, x)
    _, v2, v3 = cgf_derivatives(params, st.p)
    return RateFunctionPoint(st.x, st.p, st.v_star, float(v2), float(v3), st.v_star_minus_x)


# --------------------------------------------------------------------------
# characteristic function

def _check_strip(params: HestonParams, k):
    ki = -np.imag(k)
    if np.any(~((ki > params.p_minus) & (ki < params.p_plus))):
        raise OutsideStrip(
            f"-Im(k) must lie in ({params.p_minus:.6g}, {params.p_plus:.6g})"
        )


def check_log_argument(ratio) -> None:
    """Reject log arguments that are tiny or hug the negative real axis."""
    ratio = np.asarray(ratio)
    if np.any(np.abs(ratio) < _LOG_MODULUS_FLOOR) or np.any(
        (ratio.real < 0.0) & (np.abs(ratio.imag) < _LOG_CUT_BAND)
    ):
        raise LogBranchFailure("log argument on or near the principal branch cut")


def log_char_fn(params: HestonParams, t: float, k):
    """log phi_t(k), phi_t(k) = E exp(i k (X_t - x_0))."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    k = np.asarray(k, dtype=complex)
    _check_strip(params, k)
    if t == 0.0:
        return np.zeros_like(k)
    kt = params.kappa * params.theta
    s2 = params.sigma ** 2
    beta = params.kappa - 1j * params.rho * params.sigma * k
    d = d_fn(params, k)
    bd = beta + d
    lam = 1j * k + k * k
    g = -s2 * lam / (bd * bd)
    v = -kt * lam / bd                      # V(ik)
    e = np.exp(-d * t)
    one_minus_e = -_cexpm1(-d * t)
    one_minus_ge = 1.0 - g * e
    # (1 - g e)/(1 - g) = 1 + g (1 - e)/(1 - g)
    delta = g * one_minus_e / (1.0 - g)
    check_log_argument(1.0 + delta)
    return v * t - 2.0 * kt / s2 * _clog1p(delta) + params.y0 / kt * v * one_minus_e / one_minus_ge


def char_fn(params: HestonParams, t: float, k):
    return np.exp(log_char_fn(params, t, k))
