"""Least-squares smile calibration.

The fast mode fits the closed-form two-term asymptotic smile; the slow mode
fits exact (Fourier) implied vols and is meant as a polish started from the
fast fit.  The optimiser is Nelder-Mead on an unconstrained reparameterisation,
so every trial point is a valid parameter set.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import asymptotics
from .blackscholes import implied_vol
from .errors import (
    BudgetExhausted,
    EmptyQuoteSet,
    HestonAsymError,
    InvalidParams,
    ParseError,
)
from .fourier import QuadratureConfig, lee_call_prices
from .heston import HestonParams

ASYMPTOTIC = "asymptotic"
FOURIER = "fourier"
MODELS = (ASYMPTOTIC, FOURIER)

IMPLIED_VOL = "implied_vol"
NORMALIZED_PRICE = "normalized_price"
_KIND_TAGS = {"iv": IMPLIED_VOL, "price": NORMALIZED_PRICE}

CSV_COLUMNS = ("maturity_years", "strike", "spot", "kind", "value", "weight")

# asymptotic-mode down-weighting near the two special strikes
SPECIAL_BAND = 1e-3
SPECIAL_WEIGHT = 0.1

# fixed contour for batched Fourier pricing; always inside the strip
FOURIER_ALPHA = 0.5

BARRIER_WEIGHT = 1e-8
INFEASIBLE = 1e10


# --------------------------------------------------------------------------
# quotes

@dataclass(frozen=True)
class Quote:
    maturity: float
    strike: float
    spot: float
    value_kind: str
    value: float
    weight: float = 1.0

    def __post_init__(self):
        for name in ("maturity", "strike", "spot"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if not self.weight >= 0.0:
            raise ValueError("weight must be >= 0")
        if self.value_kind == IMPLIED_VOL:
            if not 0.0 < self.value < 5.0:
                raise ValueError("implied vol must lie in (0, 5)")
        elif self.value_kind == NORMALIZED_PRICE:
            lower = max(0.0, 1.0 - self.strike / self.spot)
            if not lower < self.value < 1.0:
                raise ValueError(f"normalised price must lie in ({lower:.6g}, 1)")
        else:
            raise ValueError(f"unknown value kind {self.value_kind!r}")

    @property
    def x_total(self) -> float:
        return math.log(self.strike / self.spot)

    @property
    def x_rate(self) -> float:
        return self.x_total / self.maturity

    def target_vol(self) -> float:
        if self.value_kind == IMPLIED_VOL:
            return self.value
        return implied_vol(self.value, self.x_total, self.maturity)


@dataclass(frozen=True)
class QuoteSet:
    quotes: tuple[Quote, ...]
    vols: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.quotes:
            raise EmptyQuoteSet("no quotes")
        object.__setattr__(self, "quotes", tuple(self.quotes))
        object.__setattr__(self, "vols", np.array([q.target_vol() for q in self.quotes]))

    def __len__(self):
        return len(self.quotes)

    def __iter__(self):
        return iter(self.quotes)

    @property
    def weights(self) -> np.ndarray:
        return np.array([q.weight for q in self.quotes])

    def scaled(self, factor: float) -> "QuoteSet":
        """Same quotes with every weight multiplied by ``factor``."""
        return QuoteSet(tuple(
            Quote(q.maturity, q.strike, q.spot, q.value_kind, q.value, q.weight * factor)
            for q in self.quotes
        ))


def _parse_float(text, row, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(row, column, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(row, column, f"not finite: {text!r}")
    return value


def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"), newline="")
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return io.StringIO(fh.read().decode("utf-8-sig"), newline="")
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return io.StringIO(data, newline="")


def load_quotes(source, fmt: str = "csv") -> QuoteSet:
    """Read quotes from a path, bytes, or an open (binary or text) stream.

    Rows are numbered as lines in the file, the header being row 1.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported quote format {fmt!r}")
    reader = csv.reader(_open_text(source))
    header = next(reader, None)
    if header is None:
        raise EmptyQuoteSet("empty input")
    header = [h.strip() for h in header]
    required = CSV_COLUMNS[:-1]
    for name in required:
        if name not in header:
            raise ParseError(1, name, "missing column")
    index = {name: header.index(name) for name in CSV_COLUMNS if name in header}

    quotes = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))

        def cell(name):
            return row[index[name]].strip()

        values = {}
        for name in ("maturity_years", "strike", "spot", "value"):
            values[name] = _parse_float(cell(name), row_no, name)
        weight = 1.0
        if "weight" in index and cell("weight") != "":
            weight = _parse_float(cell("weight"), row_no, "weight")
        kind = cell("kind").lower()
        if kind not in _KIND_TAGS:
            raise ParseError(row_no, "kind", f"expected 'iv' or 'price', got {cell('kind')!r}")
        for name, col in (("maturity_years", "maturity_years"), ("strike", "strike"), ("spot", "spot")):
            if not values[name] > 0.0:
                raise ParseError(row_no, col, "must be > 0")
        if not weight >= 0.0:
            raise ParseError(row_no, "weight", "must be >= 0")
        try:
            quote = Quote(values["maturity_years"], values["strike"], values["spot"],
                          _KIND_TAGS[kind], values["value"], weight)
        except ValueError as exc:
            raise ParseError(row_no, "value", str(exc)) from None
        if quote.value_kind == NORMALIZED_PRICE:
            try:
                quote.target_vol()
            except HestonAsymError as exc:
                raise ParseError(row_no, "value", f"cannot invert price: {exc}") from None
        quotes.append(quote)
    if not quotes:
        raise EmptyQuoteSet("no data rows")
    return QuoteSet(tuple(quotes))


def write_quotes(quotes, path_or_stream) -> None:
    """Write quotes in the CSV layout read by :func:`load_quotes`."""
    kinds = {v: k for k, v in _KIND_TAGS.items()}
    own = isinstance(path_or_stream, (str, os.PathLike))
    fh = open(path_or_stream, "w", newline="", encoding="utf-8") if own else path_or_stream
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for q in quotes:
            writer.writerow([repr(q.maturity), repr(q.strike), repr(q.spot),
                             kinds[q.value_kind], repr(q.value), repr(q.weight)])
    finally:
        if own:
            fh.close()


# --------------------------------------------------------------------------
# objective

@dataclass(frozen=True)
class ResidualReport:
    """Per-quote model vols and residuals ``sqrt(w_eff) * (model - quote)``.

    Quotes where the model vol is unavailable are flagged, carry residual 0
    and do not enter ``objective``.
    """
    model_vols: np.ndarray
    effective_weights: np.ndarray
    residuals: np.ndarray
    flagged: tuple[int, ...]

    @property
    def objective(self) -> float:
        return float(np.sum(self.residuals ** 2))


def _asymptotic_vols(params: HestonParams, quotes: QuoteSet):
    vols = np.full(len(quotes), np.nan)
    for i, q in enumerate(quotes):
        try:
            vols[i] = math.sqrt(asymptotics.implied_var_asymptotic(params, q.x_rate, q.maturity))
        except HestonAsymError:
            pass
    return vols


def _fourier_vols(params: HestonParams, quotes: QuoteSet, quad: QuadratureConfig | None):
    vols = np.full(len(quotes), np.nan)
    by_t: dict[float, list[int]] = {}
    for i, q in enumerate(quotes):
        by_t.setdefault(q.maturity, []).append(i)
    for t, idx in by_t.items():
        xs = np.array([quotes.quotes[i].x_total for i in idx])
        try:
            prices = lee_call_prices(params, xs, t, FOURIER_ALPHA, quad)[0]
        except HestonAsymError:
            continue
        for i, x, c in zip(idx, xs, prices):
            try:
                vols[i] = implied_vol(c, x, t)
            except HestonAsymError:
                pass
    return vols


def _effective_weights(params: HestonParams, quotes: QuoteSet, model: str) -> np.ndarray:
    w = quotes.weights.copy()
    if model == ASYMPTOTIC:
        lo, hi = -0.5 * params.theta, 0.5 * params.theta_bar
        for i, q in enumerate(quotes):
            x = q.x_rate
            if abs(x - lo) < SPECIAL_BAND or abs(x - hi) < SPECIAL_BAND:
                w[i] *= SPECIAL_WEIGHT
    return w


def smile_residuals(params: HestonParams, quotes: QuoteSet, model: str = ASYMPTOTIC,
                    quad: QuadratureConfig | None = None) -> ResidualReport:
    if model == ASYMPTOTIC:
        vols = _asymptotic_vols(params, quotes)
    elif model == FOURIER:
        vols = _fourier_vols(params, quotes, quad)
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    w = _effective_weights(params, quotes, model)
    ok = np.isfinite(vols)
    res = np.zeros(len(quotes))
    res[ok] = np.sqrt(w[ok]) * (vols[ok] - quotes.vols[ok])
    flagged = tuple(int(i) for i in np.flatnonzero(~ok))
    return ResidualReport(vols, w, res, flagged)


def smile_objective(params: HestonParams, quotes: QuoteSet, model: str = ASYMPTOTIC,
                    quad: QuadratureConfig | None = None) -> float:
    """Weighted sum of squared implied-vol errors over the usable quotes."""
    return smile_residuals(params, quotes, model, quad).objective


# --------------------------------------------------------------------------
# optimiser

@dataclass(frozen=True)
class CalibrationResult:
    params: HestonParams
    objective_value: float
    iterations: int
    converged: bool
    per_quote_residuals: tuple[float, ...]
    model: str = ASYMPTOTIC
    flagged: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        out = self.params.as_dict()
        out.update(
            objective=self.objective_value,
            iterations=self.iterations,
            converged=self.converged,
            residuals=list(self.per_quote_residuals),
        )
        return out


def to_unconstrained(params: HestonParams) -> np.ndarray:
    return np.array([
        math.log(params.kappa),
        math.log(params.theta),
        math.log(params.sigma),
        math.atanh(params.rho),
        math.log(params.y0),
    ])


def from_unconstrained(z) -> HestonParams:
    """Map back; raises InvalidParams only through kappa_bar <= 0 (or |rho|
    rounding to 1 far out in z)."""
    return HestonParams(
        kappa=math.exp(z[0]),
        theta=math.exp(z[1]),
        sigma=math.exp(z[2]),
        rho=math.tanh(z[3]),
        y0=math.exp(z[4]),
    )


def _penalised(z, quotes, model, quad):
    if not np.all(np.isfinite(z)) or np.any(np.abs(z) > 50.0):
        return INFEASIBLE
    try:
        params = from_unconstrained(z)
    except (InvalidParams, OverflowError):
        return INFEASIBLE
    report = smile_residuals(params, quotes, model, quad)
    # a quote the model cannot price counts as if its model vol were 0
    lost = sum(report.effective_weights[i] * quotes.vols[i] ** 2 for i in report.flagged)
    return report.objective + lost - BARRIER_WEIGHT * math.log(params.kappa_bar)


def calibrate(quotes: QuoteSet, init: HestonParams, model: str = ASYMPTOTIC,
              budget: int = 2000, *, quad: QuadratureConfig | None = None,
              step: float = 0.1, raise_on_budget: bool = False) -> CalibrationResult:
    """Fit parameters to ``quotes`` starting from ``init``.

    ``budget`` caps Nelder-Mead iterations.  Running out of budget returns the
    best point found with ``converged=False`` (or raises ``BudgetExhausted``
    when ``raise_on_budget`` is set).  The returned objective never exceeds
    the objective at ``init``.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    start = smile_residuals(init, quotes, model, quad)
    if start.objective <= 1e-16 and not start.flagged:
        return CalibrationResult(init, start.objective, 0, True,
                                 tuple(start.residuals.tolist()), model, start.flagged)

    z0 = to_unconstrained(init)
    simplex = np.vstack([z0] + [z0 + step * e for e in np.eye(5)])
    opt = minimize(
        _penalised, z0, args=(quotes, model, quad), method="Nelder-Mead",
        options=dict(maxiter=budget, maxfev=50 * budget, initial_simplex=simplex,
                     xatol=1e-8, fatol=1e-16, adaptive=False),
    )
    best = from_unconstrained(opt.x)
    report = smile_residuals(best, quotes, model, quad)
    converged = bool(opt.success)
    if report.objective > start.objective or len(report.flagged) > len(start.flagged):
        best, report = init, start
    result = CalibrationResult(best, report.objective, int(opt.nit), converged,
                               tuple(report.residuals.tolist()), model, report.flagged)
    if not converged and raise_on_budget:
        exc = BudgetExhausted(f"no convergence within {budget} iterations")
        exc.result = result
        raise exc
    return result


def calibrate_two_stage(quotes: QuoteSet, init: HestonParams, budget: int = 2000,
                        polish_budget: int = 400, *, quad: QuadratureConfig | None = None):
    """Asymptotic fit followed by a Fourier polish started from it.

    Returns ``(asymptotic_result, fourier_result)``.
    """
    fast = calibrate(quotes, init, ASYMPTOTIC, budget, quad=quad)
    slow = calibrate(quotes, fast.params, FOURIER, polish_budget, quad=quad, step=0.02)
    return fast, slow
