"""Large-maturity asymptotics of Heston call prices and implied volatility."""

from .asymptotics import (
    PricingResult,
    a1_fixed,
    a1_hat,
    amplitude_A,
    call_price_asymptotic,
    call_price_fixed_strike_asymptotic,
    fixed_strike_level,
    implied_var_asymptotic,
    implied_var_fixed_strike,
    sigma_inf_sq,
    smile_point,
)
from .blackscholes import bs_call, implied_vol
from .calibration import Quote, QuoteSet, calibrate, load_quotes, smile_objective
from .errors import HestonAsymError
from .fourier import ContourChoice, QuadratureConfig, exact_implied_vol, lee_call_price
from .heston import HestonParams, char_fn, limiting_cgf, rate_function, saddlepoint, u_fn, validate_params

__all__ = [
    "ContourChoice", "HestonAsymError", "HestonParams", "PricingResult", "QuadratureConfig",
    "Quote", "QuoteSet", "a1_fixed", "a1_hat", "amplitude_A", "bs_call", "calibrate",
    "call_price_asymptotic", "call_price_fixed_strike_asymptotic", "char_fn",
    "exact_implied_vol", "fixed_strike_level", "implied_var_asymptotic",
    "implied_var_fixed_strike", "implied_vol", "lee_call_price", "limiting_cgf",
    "load_quotes", "rate_function", "saddlepoint", "sigma_inf_sq", "smile_objective",
    "smile_point", "u_fn", "validate_params",
]
