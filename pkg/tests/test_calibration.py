import io
import json
import math

import numpy as np
import pytest

from conftest import SPOT
from hestonasym import asymptotics
from hestonasym.calibration import (
    ASYMPTOTIC,
    FOURIER,
    IMPLIED_VOL,
    NORMALIZED_PRICE,
    Quote,
    QuoteSet,
    calibrate,
    from_unconstrained,
    load_quotes,
    smile_objective,
    smile_residuals,
    to_unconstrained,
    write_quotes,
)
from hestonasym.errors import BudgetExhausted, EmptyQuoteSet, KappaBarNonPositive, ParseError
from hestonasym.fourier import exact_implied_vol, lee_call_price
from hestonasym.heston import HestonParams

HEADER = "maturity_years,strike,spot,kind,value,weight\n"


def _asymptotic_quotes(params, maturities=(5.0, 9.0), strikes=np.linspace(2000, 6000, 9)):
    qs = []
    for t in maturities:
        for k in strikes:
            x = math.log(k / SPOT) / t
            vol = math.sqrt(asymptotics.implied_var_asymptotic(params, x, t))
            qs.append(Quote(t, float(k), SPOT, IMPLIED_VOL, vol))
    return QuoteSet(tuple(qs))


def _fourier_quotes(params, maturities=(9.0,), strikes=np.linspace(1460, 7300, 15)):
    return QuoteSet(tuple(
        Quote(t, float(k), SPOT, IMPLIED_VOL, exact_implied_vol(params, math.log(k / SPOT), t, "total"))
        for t in maturities for k in strikes
    ))


# --------------------------------------------------------------------------
# loading

def test_load_single_row():
    qs = load_quotes((HEADER + "1.0,3729.79,3729.79,iv,0.2,1\n").encode())
    assert len(qs) == 1
    q = qs.quotes[0]
    assert q.value_kind == IMPLIED_VOL and q.weight == 1.0 and q.x_total == 0.0


def test_load_default_weight_and_price_kind():
    price = lee_call_price(HestonParams(1.7609, 0.0494, 0.4086, -0.5195, 0.0464), 0.1, 2.0)
    text = "maturity_years,strike,spot,kind,value\n2.0,%r,1.0,price,%r\n" % (math.exp(0.1), price)
    qs = load_quotes(io.BytesIO(text.encode()))
    assert qs.quotes[0].value_kind == NORMALIZED_PRICE
    assert qs.quotes[0].weight == 1.0
    assert qs.vols[0] == pytest.approx(0.2, abs=0.05)


def test_load_negative_strike_names_row():
    text = HEADER + "1.0,3729.79,3729.79,iv,0.2,1\n2.0,-5,3729.79,iv,0.2,1\n"
    with pytest.raises(ParseError) as info:
        load_quotes(text.encode())
    assert info.value.row == 3 and info.value.column == "strike"
    assert "row 3" in str(info.value)


@pytest.mark.parametrize("row, column", [
    ("1.0,100,100,iv,abc,1", "value"),
    ("1.0,100,100,vol,0.2,1", "kind"),
    ("1.0,100,100,iv,7.0,1", "value"),
    ("1.0,100,100,iv,0.2,-1", "weight"),
    ("0,100,100,iv,0.2,1", "maturity_years"),
    ("1.0,100,100,price,1.5,1", "value"),
])
def test_load_rejections(row, column):
    with pytest.raises(ParseError) as info:
        load_quotes((HEADER + row + "\n").encode())
    assert info.value.column == column and info.value.row == 2


def test_load_missing_column():
    with pytest.raises(ParseError):
        load_quotes(b"maturity_years,strike,kind,value\n1,1,iv,0.2\n")


def test_load_empty():
    with pytest.raises(EmptyQuoteSet):
        load_quotes(HEADER.encode())
    with pytest.raises(EmptyQuoteSet):
        load_quotes(b"")


def test_reference_shaped_file(tmp_path):
    rows = [f"{t},{k},{SPOT},iv,0.2,1" for t in range(1, 10) for k in range(1460, 7301, 730)]
    path = tmp_path / "q.csv"
    path.write_text(HEADER + "\n".join(rows) + "\n", encoding="utf-8")
    qs = load_quotes(str(path))
    assert len(qs) == len(rows)


def test_write_read_round_trip(tmp_path, params):
    qs = _asymptotic_quotes(params, (5.0,), np.linspace(3000, 4500, 4))
    path = tmp_path / "q.csv"
    write_quotes(qs, path)
    again = load_quotes(path)
    assert again.quotes == qs.quotes


# --------------------------------------------------------------------------
# objective

def test_self_fit_zero(params):
    qs = _asymptotic_quotes(params)
    assert smile_objective(params, qs, ASYMPTOTIC) < 1e-16


def test_weight_scaling(params):
    qs = _fourier_quotes(params)
    other = HestonParams(2.0, 0.05, 0.5, -0.4, 0.05)
    base = smile_objective(other, qs)
    assert smile_objective(other, qs.scaled(3.0)) == pytest.approx(3.0 * base, rel=1e-12)


def test_fourier_quotes_asymptotic_gap(params):
    qs = _fourier_quotes(params)
    obj = smile_objective(params, qs, ASYMPTOTIC)
    assert 0 < obj < 1e-4
    assert smile_objective(params, qs, FOURIER) < 1e-16


def test_residuals_recompute_objective(params):
    qs = _fourier_quotes(params)
    rep = smile_residuals(HestonParams(2.0, 0.05, 0.5, -0.4, 0.05), qs)
    assert float(np.sum(rep.residuals ** 2)) == rep.objective


def test_special_point_down_weighting(params):
    t = 5.0
    k = SPOT * math.exp(params.theta_bar / 2 * t + 1e-4 * t)
    qs = QuoteSet((Quote(t, k, SPOT, IMPLIED_VOL, 0.2), Quote(t, SPOT, SPOT, IMPLIED_VOL, 0.2)))
    rep = smile_residuals(params, qs, ASYMPTOTIC)
    assert rep.effective_weights.tolist() == [0.1, 1.0]
    assert smile_residuals(params, qs, FOURIER).effective_weights.tolist() == [1.0, 1.0]


def test_nonpositive_expansion_flagged():
    p = HestonParams(1.0, 0.04, 0.5, -0.5, 0.04)
    a1 = asymptotics.a1_hat(p, 0.0)
    t = 0.5 * -a1 / asymptotics.sigma_inf_sq(p, 0.0)
    qs = QuoteSet((Quote(t, 1.0, 1.0, IMPLIED_VOL, 0.2), Quote(5.0, 1.0, 1.0, IMPLIED_VOL, 0.2)))
    rep = smile_residuals(p, qs, ASYMPTOTIC)
    assert rep.flagged == (0,)
    assert rep.residuals[0] == 0.0 and rep.residuals[1] != 0.0


# --------------------------------------------------------------------------
# optimiser

def test_reparameterisation_round_trip(params):
    back = from_unconstrained(to_unconstrained(params))
    for a, b in zip(back.as_dict().values(), params.as_dict().values()):
        assert a == pytest.approx(b, rel=1e-14)


def test_stationary_start(params):
    qs = _asymptotic_quotes(params)
    res = calibrate(qs, params, ASYMPTOTIC, 50)
    assert res.converged and res.iterations <= 2
    assert res.params == params


def test_result_schema_and_recompute(params):
    qs = _fourier_quotes(params)
    init = HestonParams(2.0, 0.055, 0.45, -0.45, 0.05)
    res = calibrate(qs, init, ASYMPTOTIC, 300)
    d = res.as_dict()
    assert list(d) == ["kappa", "theta", "sigma", "rho", "y0", "objective", "iterations",
                       "converged", "residuals"]
    json.dumps(d)
    again = smile_objective(res.params, qs, ASYMPTOTIC)
    assert again == pytest.approx(res.objective_value, rel=1e-12, abs=1e-18)
    assert sum(r * r for r in res.per_quote_residuals) == pytest.approx(res.objective_value, rel=1e-12)
    assert res.objective_value <= smile_objective(init, qs, ASYMPTOTIC)


def test_deterministic(params):
    qs = _fourier_quotes(params)
    init = HestonParams(2.0, 0.055, 0.45, -0.45, 0.05)
    a = calibrate(qs, init, ASYMPTOTIC, 150)
    b = calibrate(qs, init, ASYMPTOTIC, 150)
    assert a == b


def test_budget_exhausted(params):
    qs = _fourier_quotes(params)
    init = HestonParams(2.0, 0.055, 0.45, -0.45, 0.05)
    res = calibrate(qs, init, ASYMPTOTIC, 3)
    assert not res.converged
    assert res.objective_value <= smile_objective(init, qs, ASYMPTOTIC)
    with pytest.raises(BudgetExhausted) as info:
        calibrate(qs, init, ASYMPTOTIC, 3, raise_on_budget=True)
    assert info.value.result == res


def test_feasible_near_kappa_bar_zero(params, monkeypatch):
    qs = _fourier_quotes(params)
    init = HestonParams(0.52, 0.05, 0.5, 0.999, 0.05)    # kappa_bar ~ 0.02
    seen = []
    orig = HestonParams.__post_init__

    def spy(self):
        try:
            orig(self)
        except KappaBarNonPositive:
            seen.append(self)
            raise
    monkeypatch.setattr(HestonParams, "__post_init__", spy)
    res = calibrate(qs, init, ASYMPTOTIC, 200)
    assert res.params.kappa_bar > 0
    assert res.objective_value <= smile_objective(init, qs, ASYMPTOTIC)
    # infeasible trial points are caught inside the objective, never surfaced
    assert all(p.kappa - p.rho * p.sigma <= 0 for p in seen)


def test_invalid_arguments(params):
    qs = _asymptotic_quotes(params)
    with pytest.raises(ValueError):
        calibrate(qs, params, "sabr")
    with pytest.raises(ValueError):
        calibrate(qs, params, ASYMPTOTIC, 0)
