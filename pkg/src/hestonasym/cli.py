"""Command-line entry point: price, smile, compare, calibrate.

Exit status is 0 on success, 2 on a usage error and 1 when a numerical
routine fails (the library error is printed verbatim on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from decimal import Decimal

import numpy as np

from . import asymptotics
from .calibration import ASYMPTOTIC, FOURIER, calibrate, calibrate_two_stage, load_quotes
from .errors import HestonAsymError, InvalidParams, NonPositiveResult
from .fourier import exact_implied_vol, lee_call_result
from .heston import HestonParams

PARAM_KEYS = ("kappa", "theta", "sigma", "rho", "y0")
SMILE_COLUMNS = ("t", "strike", "x", "sigma_inf", "sigma_first_order", "sigma_exact")
COMPARE_COLUMNS = SMILE_COLUMNS + ("error_zeroth", "error_first")


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """12 significant digits, locale independent."""
    if isinstance(value, str):
        return value
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def _abs_diff(a: str, b: str) -> str:
    # exact decimal difference of the printed values
    if a == "nan" or b == "nan":
        return "nan"
    return str(abs(Decimal(a) - Decimal(b)))


# --------------------------------------------------------------------------
# argument handling

def _params_from_args(args) -> HestonParams:
    flags = [getattr(args, k) for k in PARAM_KEYS]
    given = [f is not None for f in flags]
    if args.params is not None and any(given):
        raise UsageError("--params cannot be combined with --kappa/--theta/--sigma/--rho/--y0")
    if args.params is not None:
        try:
            with open(args.params, encoding="utf-8") as fh:
                data = json.load(fh)
            values = [float(data[k]) for k in PARAM_KEYS]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"--params: cannot read parameters from {args.params!r}: {exc}") from None
    else:
        missing = [f"--{k}" for k, g in zip(PARAM_KEYS, given) if not g]
        if missing:
            raise UsageError(f"missing parameter flags: {' '.join(missing)} (or use --params)")
        values = flags
    try:
        return HestonParams(*values)
    except InvalidParams as exc:
        raise UsageError(f"invalid parameters: {exc}") from None


def _maturities(text: str) -> list[float]:
    try:
        ts = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--t: expected a comma separated list of numbers, got {text!r}") from None
    if not ts or any(not (t > 0.0 and math.isfinite(t)) for t in ts):
        raise UsageError(f"--t: maturities must be positive, got {text!r}")
    return ts


def _range(text: str, flag: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{flag}: expected lo:hi:{'step' if flag == '--strikes' else 'n'}, got {text!r}")
    try:
        lo, hi, third = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"{flag}: non-numeric entry in {text!r}") from None
    return lo, hi, third


def _grid(args) -> tuple[str, np.ndarray]:
    """Return ``('strike', values)`` or ``('x', values)``."""
    if (args.strikes is None) == (args.x is None):
        raise UsageError("give exactly one of --strikes lo:hi:step or --x lo:hi:n")
    if args.strikes is not None:
        lo, hi, step = _range(args.strikes, "--strikes")
        if not (step > 0.0 and 0.0 < lo <= hi):
            raise UsageError("--strikes: need 0 < lo <= hi and step > 0")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return "strike", lo + step * np.arange(n)
    lo, hi, n = _range(args.x, "--x")
    if n != int(n) or n < 1:
        raise UsageError("--x: the count n must be a positive integer")
    if int(n) == 1 and lo != hi:
        raise UsageError("--x: n = 1 needs lo == hi")
    return "x", np.linspace(lo, hi, int(n))


def _points(args, t: float):
    """(strike, x, x_total) for every grid point at maturity t."""
    kind, values = _grid(args)
    spot = args.spot
    out = []
    for v in values:
        if kind == "strike":
            x_total = math.log(v / spot)
            strike = float(v)
        else:
            x_total = float(v) * t if args.convention == "rate" else float(v)
            strike = spot * math.exp(x_total)
        x = x_total / t if args.convention == "rate" else x_total
        out.append((strike, x, x_total))
    return out


# --------------------------------------------------------------------------
# commands

def _smile_rows(params: HestonParams, args, with_errors: bool):
    rows = []
    for t in _maturities(args.t):
        for strike, x, x_total in _points(args, t):
            if args.convention == "rate":
                s2 = asymptotics.sigma_inf_sq(params, x)
                try:
                    first = math.sqrt(asymptotics.implied_var_asymptotic(params, x, t))
                except NonPositiveResult:
                    first = float("nan")
            else:
                s2 = asymptotics.fixed_strike_level(params)
                try:
                    first = math.sqrt(asymptotics.implied_var_fixed_strike(params, x_total, t))
                except NonPositiveResult:
                    first = float("nan")
            exact = exact_implied_vol(params, x_total, t, "total")
            row = [fmt(t), fmt(strike), fmt(x), fmt(math.sqrt(s2)), fmt(first), fmt(exact)]
            if with_errors:
                row += [_abs_diff(row[5], row[3]), _abs_diff(row[5], row[4])]
            rows.append(row)
    return rows


def _price(params: HestonParams, args):
    ts = _maturities(args.t)
    if len(ts) != 1:
        raise UsageError("price: --t takes a single maturity")
    t = ts[0]
    if (args.strike is None) == (args.x is None):
        raise UsageError("price: give exactly one of --strike or --x")
    if args.strike is not None:
        if not args.strike > 0.0:
            raise UsageError("--strike must be > 0")
        x_total = math.log(args.strike / args.spot)
    else:
        try:
            xv = float(args.x)
        except ValueError:
            raise UsageError(f"--x: expected a number for price, got {args.x!r}") from None
        x_total = xv * t if args.convention == "rate" else xv
    if args.convention == "rate":
        asym = asymptotics.call_price_asymptotic(params, x_total / t, t)
    else:
        asym = asymptotics.call_price_fixed_strike_asymptotic(params, x_total, t)
    exact = lee_call_result(params, x_total, t)
    return {
        "t": t,
        "strike": args.spot * math.exp(x_total),
        "spot": args.spot,
        "x_total": x_total,
        "convention": args.convention,
        "asymptotic": asym.as_dict(),
        "fourier": exact.as_dict(),
    }


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else None
    return obj


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _table_text(columns, rows, fmt_kind):
    if fmt_kind == "json":
        records = [{c: (None if v == "nan" else float(v)) for c, v in zip(columns, r)} for r in rows]
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for k in PARAM_KEYS:
        common.add_argument(f"--{k}", type=float)
    common.add_argument("--params", help="JSON file with kappa, theta, sigma, rho, y0")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--t", required=True, help="comma separated maturities in years")
    grid.add_argument("--strikes", help="lo:hi:step in price units")
    grid.add_argument("--x", help="lo:hi:n log-moneyness grid (single value for price)")
    grid.add_argument("--convention", choices=("rate", "total"), default="rate")
    grid.add_argument("--spot", type=float, default=1.0)

    parser = argparse.ArgumentParser(prog="hestonasym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("price", parents=[common, grid], help="asymptotic and Fourier price of one call")
    p.add_argument("--strike", type=float)
    sub.add_parser("smile", parents=[common, grid], help="asymptotic and exact implied vols on a grid")
    sub.add_parser("compare", parents=[common, grid], help="smile plus absolute error columns")
    c = sub.add_parser("calibrate", parents=[common], help="fit parameters to a quote CSV")
    c.add_argument("--quotes", required=True, help="quote CSV")
    c.add_argument("--model", choices=(ASYMPTOTIC, FOURIER, "two-stage"), default="two-stage")
    c.add_argument("--budget", type=int, default=2000)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "spot", 1.0) <= 0.0:
            raise UsageError("--spot must be > 0")
        params = _params_from_args(args)
        if args.command == "price":
            result = _price(params, args)
            if args.format == "csv":
                cols = ("method", "normalized_price", "residue_part", "correction_part", "error_estimate")
                rows = [[fmt(result[m].get(c)) for c in cols] for m in ("asymptotic", "fourier")]
                text = _table_text(cols, rows, "csv")
            else:
                text = json.dumps(_json_ready(result), indent=2) + "\n"
        elif args.command in ("smile", "compare"):
            with_errors = args.command == "compare"
            rows = _smile_rows(params, args, with_errors)
            cols = COMPARE_COLUMNS if with_errors else SMILE_COLUMNS
            text = _table_text(cols, rows, args.format or "csv")
        else:
            if args.budget < 1:
                raise UsageError("--budget must be >= 1")
            if args.format == "csv":
                raise UsageError("--format: calibrate writes JSON only")
            try:
                quotes = load_quotes(args.quotes)
            except OSError as exc:
                raise UsageError(f"--quotes: {exc}") from None
            if args.model == "two-stage":
                result = calibrate_two_stage(quotes, params, args.budget)[1]
            else:
                result = calibrate(quotes, params, args.model, args.budget)
            text = json.dumps(result.as_dict(), indent=2) + "\n"
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hestonasym: error: {exc}", file=sys.stderr)
        return 2
    except HestonAsymError as exc:
        print(f"hestonasym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
