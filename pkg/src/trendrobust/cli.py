"""Command-line front end: formulas, sweeps, simulations, Monte Carlo, backtests.

Tables are written as CSV, single summaries as JSON, to ``--output`` or
stdout.  Exit codes: 0 success, 1 runtime error, 2 usage error, 3 bad input
data, 4 numerically infeasible request.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict

import numpy as np

from . import analytics as an
from .backtest import BacktestProtocol, PriceDataError, load_price_csv, run_backtest
from .montecarlo import (
    DURATION_COLUMNS,
    RATE_COLUMNS,
    RATE_MC_COLUMNS,
    KalmanAgent,
    McExperimentConfig,
    run_mc,
    sweep_durations,
    sweep_rates,
    write_table,
)
from .simulation import HestonParams, PathGrid, simulate_heston, simulate_ou_gbm, write_path_csv

DAYS_PER_YEAR = 252
WORKERS_ENV = "TRENDROBUST_WORKERS"

EXIT_RUNTIME, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 1, 2, 3, 4


class UsageError(Exception):
    pass


class InfeasibleError(Exception):
    pass


def _grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:num`` (inclusive linspace)."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use a,b,c or start:stop:num") from None


def _duration(args, name: str, default_years=None, required=True):
    days = getattr(args, f"{name}_days", None)
    years = getattr(args, f"{name}_years", None)
    if days is not None and years is not None:
        raise UsageError(f"give only one of --{name}-days / --{name}-years")
    if days is not None:
        return days / DAYS_PER_YEAR
    if years is not None:
        return years
    if default_years is None and required:
        raise UsageError(f"--{name}-days or --{name}-years is required")
    return default_years


def _add_duration(p, name: str, what: str):
    p.add_argument(f"--{name}-days", type=float, help=f"{what} in business days")
    p.add_argument(f"--{name}-years", f"--{name}", dest=f"{name}_years", type=float, help=f"{what} in years")


def _add_model(p, sigma_s=True):
    p.add_argument("--lambda", dest="lambda_", type=float, required=True, help="trend mean-reversion speed")
    p.add_argument("--sigma-mu", type=float, required=True, help="trend volatility")
    if sigma_s:
        p.add_argument("--sigma-s", type=float, default=0.3, help="price volatility (default 0.3)")


def _add_heston(p):
    g = p.add_argument_group("Heston variance (used with --model heston)")
    g.add_argument("--kappa", type=float, default=4.0)
    g.add_argument("--v-inf", type=float, default=0.09)
    g.add_argument("--eps", type=float, default=0.05)
    g.add_argument("--rho", type=float, default=-0.6)
    g.add_argument("--v0", type=float, default=0.09)


def _heston(args):
    return HestonParams(args.kappa, args.v_inf, args.eps, args.rho, args.v0)


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1


@contextmanager
def _out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _num(x: float) -> str:
    return f"{x:.15g}"


# --- subcommands ---------------------------------------------------------------------


def cmd_analytic(args):
    p = an.TrendModelParams(args.lambda_, args.sigma_mu, args.sigma_s)
    if args.derived:
        return json.dumps(asdict(an.derived_quantities(p)))
    if args.well_specified:
        return _num(an.well_specified_rate(p))
    if args.misspecified:
        c = an.OptimalStrategyConfig(args.m, _duration(args, "tau"))
        return _num(an.misspecified_rate(p, c))
    if args.optimal_duration:
        d = an.optimal_duration(p, args.m)
        if not d.feasible:
            raise InfeasibleError(
                f"no optimal duration: SNR/lambda = {p.snr / p.lambda_:g} <= m/(2(2-m)) = {args.m / (2 * (2 - args.m)):g}"
            )
        return json.dumps(asdict(d))
    if args.filter_variance:
        t = float("inf") if args.t is None else args.t
        return _num(an.filter_variance(p, _duration(args, "tau"), t))
    if args.crossma or args.single_ma:
        l2 = _duration(args, "l2")
        if args.single_ma:
            return _num(an.single_ma_rate(p, args.gamma, args.alpha, l2))
        c = an.CrossMaConfig(args.gamma, args.alpha, _duration(args, "l1"), l2)
        return _num(an.crossma_rate(p, c))
    raise UsageError("choose a formula flag")


def cmd_sweep_durations(args):
    rows = sweep_durations(args.lambdas, args.snrs, args.m)
    with _out(args.output) as fh:
        write_table(rows, fh, DURATION_COLUMNS)


def _strategies(args):
    opt = an.OptimalStrategyConfig(args.m, _duration(args, "tau", default_years=1.0))
    cma = an.CrossMaConfig(
        args.gamma, args.alpha, _duration(args, "l1", 5 / DAYS_PER_YEAR), _duration(args, "l2", 1.0)
    )
    return opt, cma


def cmd_sweep_rates(args):
    opt, cma = _strategies(args)
    rows = sweep_rates(
        args.sigma_mus,
        args.lambda_,
        args.sigma_s,
        opt,
        cma,
        n_paths=args.paths,
        horizon=args.horizon,
        seed=args.seed,
        workers=_workers(args),
    )
    cols = RATE_COLUMNS + (RATE_MC_COLUMNS if args.paths > 0 else [])
    with _out(args.output) as fh:
        write_table(rows, fh, cols)


def cmd_simulate(args):
    p = an.TrendModelParams(args.lambda_, args.sigma_mu, args.sigma_s)
    grid = PathGrid.from_horizon(args.horizon)
    if args.model == "heston":
        path = simulate_heston(p, _heston(args), grid, args.seed)
    else:
        path = simulate_ou_gbm(p, grid, args.seed)
    with _out(args.output) as fh:
        write_path_csv(path, fh)


def cmd_mc(args):
    p = an.TrendModelParams(args.lambda_, args.sigma_mu, args.sigma_s)
    opt, cma = _strategies(args)
    strat = {
        "optimal": opt,
        "crossma": cma,
        "kalman": KalmanAgent(args.lambda_a, args.sigma_mu_a),
    }[args.strategy]
    cfg = McExperimentConfig(
        p,
        strat,
        horizon=args.horizon,
        n_paths=args.paths,
        seed=args.seed,
        heston=_heston(args) if args.model == "heston" else None,
        rebalancing=args.rebalancing,
    )
    summary = run_mc(cfg, _workers(args))
    return summary.to_json()


def cmd_backtest(args):
    proto = BacktestProtocol(
        tau_days=args.tau_days, m=args.m, gamma=args.gamma, alpha=args.alpha,
        l1_days=args.l1_days, l2_days=args.l2_days,
    )
    reports = [run_backtest(load_price_csv(f), proto).to_dict() for f in args.csv]
    return json.dumps(reports[0] if len(reports) == 1 else reports)


# --- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trendrobust", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    a = sub.add_parser("analytic", help="evaluate one closed-form formula")
    _add_model(a)
    which = a.add_mutually_exclusive_group(required=True)
    for flag in ("derived", "misspecified", "well-specified", "optimal-duration",
                 "filter-variance", "crossma", "single-ma"):
        which.add_argument(f"--{flag}", action="store_true")
    a.add_argument("--m", type=float, default=1.0, help="leverage of the EMA strategy")
    _add_duration(a, "tau", "EMA duration")
    a.add_argument("--t", type=float, help="time for --filter-variance (default: stationary)")
    a.add_argument("--gamma", type=float, default=-1.0)
    a.add_argument("--alpha", type=float, default=2.0)
    _add_duration(a, "l1", "short window")
    _add_duration(a, "l2", "long window")
    a.set_defaults(func=cmd_analytic)

    d = sub.add_parser("sweep-durations", help="tau* and tau_opt over a (lambda, SNR) grid")
    d.add_argument("--lambdas", type=_grid, required=True)
    d.add_argument("--snrs", type=_grid, required=True)
    d.add_argument("--m", type=float, default=1.0)
    d.add_argument("--output")
    d.set_defaults(func=cmd_sweep_durations)

    def strategy_flags(p):
        p.add_argument("--m", type=float, default=1.0)
        _add_duration(p, "tau", "EMA duration (default 1 year)")
        p.add_argument("--gamma", type=float, default=-1.0)
        p.add_argument("--alpha", type=float, default=2.0)
        _add_duration(p, "l1", "short window (default 5 days)")
        _add_duration(p, "l2", "long window (default 252 days)")

    def mc_flags(p, horizon):
        p.add_argument("--horizon", type=float, default=horizon, help="years")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int)
        p.add_argument("--output")

    r = sub.add_parser("sweep-rates", help="asymptotic rates of both strategies along sigma_mu")
    r.add_argument("--lambda", dest="lambda_", type=float, required=True)
    r.add_argument("--sigma-s", type=float, default=0.3)
    r.add_argument("--sigma-mus", type=_grid, required=True)
    strategy_flags(r)
    r.add_argument("--paths", type=int, default=0, help="Monte Carlo paths per point (0: closed form only)")
    mc_flags(r, 100.0)
    r.set_defaults(func=cmd_sweep_rates)

    s = sub.add_parser("simulate", help="dump one simulated path as CSV")
    s.add_argument("--model", choices=["ou-gbm", "heston"], default="ou-gbm")
    _add_model(s)
    _add_heston(s)
    s.add_argument("--horizon", type=float, default=10.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("mc", help="Monte Carlo run of one strategy, JSON summary")
    m.add_argument("--model", choices=["ou-gbm", "heston"], default="ou-gbm")
    m.add_argument("--strategy", choices=["optimal", "crossma", "kalman"], required=True)
    _add_model(m)
    _add_heston(m)
    strategy_flags(m)
    m.add_argument("--lambda-a", type=float, default=1.0, help="agent's lambda (kalman)")
    m.add_argument("--sigma-mu-a", type=float, default=0.9, help="agent's sigma_mu (kalman)")
    m.add_argument("--paths", type=int, default=2000)
    m.add_argument("--rebalancing", choices=["continuous", "step"], default="continuous")
    mc_flags(m, 50.0)
    m.set_defaults(func=cmd_mc)

    b = sub.add_parser("backtest", help="Sharpe ratios of both strategies on date,close CSV files")
    b.add_argument("csv", nargs="+")
    b.add_argument("--tau-days", type=int, default=252)
    b.add_argument("--m", type=float, default=0.1)
    b.add_argument("--gamma", type=float, default=-1.0)
    b.add_argument("--alpha", type=float, default=2.0)
    b.add_argument("--l1-days", type=int, default=5)
    b.add_argument("--l2-days", type=int, default=252)
    b.add_argument("--output")
    b.set_defaults(func=cmd_backtest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        text = args.func(args)
        if text is not None:
            with _out(getattr(args, "output", None)) as fh:
                fh.write(text + "\n")
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PriceDataError, OSError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_DATA
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
