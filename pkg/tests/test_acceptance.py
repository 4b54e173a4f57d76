"""Acceptance suite: one PASS/FAIL line per criterion, printed with ``-s``
and always recorded in the captured output of ``pytest -v``.

Each test measures the quantities named by its criterion, prints them and
asserts at the stated tolerance.  Nothing is relaxed to force a pass.
"""

import math
import time

import numpy as np
import pytest

from conftest import REFERENCE, SPOT
from oracles import ode_call_prices
from hestonasym import asymptotics as asy
from hestonasym import heston
from hestonasym.blackscholes import (
    a_bs,
    bs_call_fixed_strike_large_time,
    bs_call_large_time,
    bs_call_total,
    bs_rate,
    indicator_residue,
)
from hestonasym.calibration import IMPLIED_VOL, Quote, QuoteSet, calibrate_two_stage
from hestonasym.fourier import ContourChoice, exact_implied_vol, lee_call_price
from hestonasym.heston import HestonParams, validate_params

KEYS = ("kappa", "theta", "sigma", "rho", "y0")


def report(n, ok, detail, elapsed):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} | {detail} | {elapsed:.2f}s"
    print(line)
    return line


@pytest.fixture(scope="module")
def p():
    return HestonParams(**REFERENCE)


def test_criterion_1_identities(p):
    t0 = time.perf_counter()
    lo, hi = -p.theta / 2, p.theta_bar / 2
    errs = {}
    errs["V(0)"] = abs(heston.limiting_cgf(p, 0.0))
    errs["V(1)"] = abs(heston.limiting_cgf(p, 1.0))
    errs["phi(-i)"] = max(abs(heston.char_fn(p, t, -1j) - 1) for t in (0.1, 1.0, 5.0, 10.0, 50.0))
    xs = np.linspace(-1.0, 1.0, 201)
    v1, _, _ = heston.cgf_derivatives(p, heston.saddlepoint(p, xs))
    errs["V'(p*)=x"] = float(np.max(np.abs(v1 - xs)))
    errs["p*(-theta/2)"] = abs(heston.saddlepoint(p, lo))
    errs["p*(thetabar/2)"] = abs(heston.saddlepoint(p, hi) - 1)
    errs["V*(-theta/2)"] = abs(heston.rate_function(p, lo).v_star)
    errs["V*(thetabar/2)"] = abs(heston.rate_function(p, hi).v_star - hi)
    errs["U(0)"] = abs(heston.u_fn(p, 0.0) - 1)
    errs["U'(0)"] = abs(heston.u_prime(p, 0.0) - (p.theta - p.y0) / (2 * p.kappa))
    errs["U'(1)"] = abs(heston.u_prime(p, 1.0) - (p.y0 - p.theta_bar) / (2 * p.kappa_bar))
    errs["sinf2(thetabar/2)"] = abs(asy.sigma_inf_sq(p, hi) - p.theta_bar)
    errs["sinf2(-theta/2)"] = abs(asy.sigma_inf_sq(p, lo) - p.theta)
    quad = 0.0
    for x in xs:
        s2 = asy.sigma_inf_sq(p, x)
        quad = max(quad, abs(float(bs_rate(x, math.sqrt(s2))) - heston.rate_function(p, x).v_star))
    errs["quadratic"] = quad
    amp = 0.0
    for x in np.linspace(-0.5, 0.5, 101):
        if min(abs(x - lo), abs(x - hi)) < 1e-3:
            continue
        pt = asy.smile_point(p, x)
        ref = asy.amplitude_A(p, x)
        amp = max(amp, abs(a_bs(x, math.sqrt(pt.sigma_inf_sq), pt.a1_hat) / ref - 1))
    elapsed = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    ok = max(errs.values()) < 1e-10 and amp < 1e-9 and elapsed < 5
    report(1, ok, f"max abs identity error {errs[worst]:.2e} ({worst}), amplitude rel {amp:.2e}", elapsed)
    assert ok


def test_criterion_2_oracle_equivalence(p):
    t0 = time.perf_counter()
    xs = [-0.3, -0.1, 0.0, 0.1, 0.3]
    worst = 0.0
    for t in (1.0, 2.0, 5.0, 10.0):
        ref = ode_call_prices(p, t, xs)
        got = np.array([lee_call_price(p, x, t) for x in xs])
        worst = max(worst, float(np.max(np.abs(got / ref - 1))))
    spread = 0.0
    for t in (1.0, 5.0, 10.0):
        for x in xs:
            vals = [lee_call_price(p, x, t, ContourChoice(a)) for a in (0.25, 0.5, 0.75, 1.5)]
            spread = max(spread, max(vals) - min(vals))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-7 and spread < 1e-8 and elapsed < 30
    report(2, ok, f"ODE rel err {worst:.2e} (20 pairs), contour spread {spread:.2e} (4 alphas)", elapsed)
    assert ok


def _correction_error(p, x, t):
    r = asy.call_price_asymptotic(p, x, t)
    exact = lee_call_price(p, x * t, t)
    return abs(r.correction_part - (exact - r.residue_part)) / abs(exact - r.residue_part)


def _bs_rate_error(x, t, s, a1):
    exact = float(bs_call_total(x * t, t, math.sqrt(s * s + a1 / t)))
    residue = indicator_residue(x, t, -s * s / 2, s * s / 2).value
    return abs(bs_call_large_time(x, t, s, a1) - exact) / abs(exact - residue)


def _bs_fixed_error(x, t, s, a1):
    exact = float(bs_call_total(x, t, math.sqrt(s * s + a1 / t)))
    return abs(bs_call_fixed_strike_large_time(x, t, s, a1) - exact) / exact


def test_criterion_3_convergence(p):
    t0 = time.perf_counter()
    parts, ok = [], True

    e20, e40 = _correction_error(p, 0.1, 20.0), _correction_error(p, 0.1, 40.0)
    ok &= e40 / e20 <= 0.6
    parts.append(f"(a) ratio {e40 / e20:.3f}")

    bad = []
    for x in (-0.05, 0.05, 0.1):
        prods = [t * abs(exact_implied_vol(p, x, t) ** 2 - asy.implied_var_asymptotic(p, x, t))
                 for t in (5.0, 10.0, 20.0, 40.0)]
        if not all(a > b for a, b in zip(prods, prods[1:])):
            bad.append(x)
    ok &= not bad
    parts.append(f"(b) non-decreasing at {bad}")

    bad = []
    for x in (-0.2, 0.0, 0.2):
        prods = [t * abs(exact_implied_vol(p, x, t, "total") ** 2 - asy.implied_var_fixed_strike(p, x, t))
                 for t in (10.0, 20.0, 40.0)]
        if not all(a > b for a, b in zip(prods, prods[1:])):
            bad.append(x)
    ok &= not bad
    parts.append(f"(c) non-decreasing at {bad}")

    # Black-Scholes analogues with the Heston limiting parameters
    x = 0.1
    s, a1 = math.sqrt(asy.sigma_inf_sq(p, x)), asy.a1_hat(p, x)
    r_rate = _bs_rate_error(x, 40.0, s, a1) / _bs_rate_error(x, 20.0, s, a1)
    xf = 0.1
    sf, a1f = math.sqrt(asy.fixed_strike_level(p)), asy.a1_fixed(p, xf)
    r_fixed = _bs_fixed_error(xf, 40.0, sf, a1f) / _bs_fixed_error(xf, 20.0, sf, a1f)
    ok &= r_rate <= 0.6 and r_fixed <= 0.6
    parts.append(f"(d) ratios {r_rate:.3f}, {r_fixed:.3f}")

    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    report(3, ok, "; ".join(parts), elapsed)
    assert ok


def _smile_errors(p, t):
    strikes = np.arange(1460.0, 7300.0 + 1e-9, 100.0)
    e0, e1 = [], []
    for k in strikes:
        x_total = math.log(k / SPOT)
        exact = exact_implied_vol(p, x_total, t, "total")
        x = x_total / t
        e0.append(abs(exact - math.sqrt(asy.sigma_inf_sq(p, x))))
        e1.append(abs(exact - math.sqrt(asy.implied_var_asymptotic(p, x, t))))
    return np.array(e0), np.array(e1)


def test_criterion_4_smile_reproduction(p):
    t0 = time.perf_counter()
    e0_9, e1_9 = _smile_errors(p, 9.0)
    e0_5, e1_5 = _smile_errors(p, 5.0)
    frac9 = float(np.mean(e1_9 < e0_9))
    frac5 = float(np.mean(e1_5 < e0_5))
    top = max(e0_9.max(), e1_9.max())
    elapsed = time.perf_counter() - t0
    ok = frac9 >= 0.85 and top < 0.02 and frac5 >= 0.75 and elapsed < 120
    report(4, ok, f"t=9 first-order better at {frac9:.0%} of {e0_9.size}, max err {top:.4f}; "
                  f"t=5 better at {frac5:.0%}", elapsed)
    assert ok


def test_criterion_5_properties():
    t0 = time.perf_counter()
    degen = validate_params(1.5, 0.04, 1e-6, 0.0, 0.04)
    flat = max(abs(exact_implied_vol(degen, x, t, "total") - 0.2)
               for x in (-0.2, 0.0, 0.2) for t in (1.0, 5.0))
    p = HestonParams(**REFERENCE)
    hi = p.theta_bar / 2
    general = min(abs(asy.amplitude_general(p, hi + s * 1e-9)) for s in (-1, 1))
    special = abs(asy.amplitude_A(p, hi))
    elapsed = time.perf_counter() - t0
    ok = flat < 1e-3 and general > 1e6 and math.isfinite(special) and special < 100 and elapsed < 60
    report(5, ok, f"flat smile dev {flat:.2e}; |A_general| at 1e-9 {general:.2e}, "
                  f"|A_special| {special:.3f}", elapsed)
    assert ok


def synthetic_quotes(p, maturities=(5.0, 9.0), n=15):
    strikes = np.linspace(1460.0, 7300.0, n)
    return QuoteSet([Quote(t, float(k), SPOT, IMPLIED_VOL,
                           exact_implied_vol(p, math.log(k / SPOT), t, "total"))
                     for t in maturities for k in strikes])


def test_criterion_6_calibration(p):
    t0 = time.perf_counter()
    quotes = synthetic_quotes(p)
    init = HestonParams(*(1.3 * REFERENCE[k] for k in KEYS))
    fast, slow = calibrate_two_stage(quotes, init)
    rel = lambda r: [abs(getattr(r.params, k) / REFERENCE[k] - 1) for k in KEYS]
    fast_err, slow_err = max(rel(fast)), max(rel(slow))
    elapsed = time.perf_counter() - t0
    ok = fast_err < 0.10 and slow_err < 0.02 and elapsed < 300
    report(6, ok, f"asymptotic max rel err {fast_err:.3f} (limit 0.10), "
                  f"fourier polish {slow_err:.4f} (limit 0.02)", elapsed)
    assert ok
