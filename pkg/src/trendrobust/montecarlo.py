"""Monte Carlo experiments and parameter sweeps.

Paths are processed in fixed-size blocks.  Path ``i`` always draws from
``path_rng(seed, i)`` and lands in block ``i // block_size``, so the per-path
numbers, and therefore every summary, are identical whatever the number of
worker processes.  Reductions run over the per-path array in path order.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .analytics import (
    CrossMaConfig,
    OptimalStrategyConfig,
    TrendModelParams,
    crossma_rate,
    derived_quantities,
    misspecified_rate,
    optimal_duration,
)
from .filters import ema_run
from .simulation import HestonParams, PathGrid, heston_batch, ou_gbm_batch, path_rng
from .strategies import (
    _track,
    crossma_allocations,
    kalman_allocations,
    misspecified_allocations,
    window_steps,
)

HIST_BINS = 50
HIST_WIDTH = 4.0


@dataclass(frozen=True)
class KalmanAgent:
    """Log-optimal investor running a Kalman filter with believed parameters."""

    lambda_a: float
    sigma_mu_a: float
    prior_var: Optional[float] = None


Strategy = Union[OptimalStrategyConfig, CrossMaConfig, KalmanAgent]


@dataclass(frozen=True)
class McExperimentConfig:
    """One strategy run on ``n_paths`` simulated paths.

    The model is OU-GBM when ``heston`` is None, Heston otherwise (then
    ``params.sigma_s`` is ignored).  ``rebalancing`` selects the wealth
    mechanics, see :mod:`trendrobust.strategies`.
    """

    params: TrendModelParams
    strategy: Strategy
    horizon: float = 100.0
    n_paths: int = 2000
    seed: int = 0
    delta: float = 1.0 / 252
    heston: Optional[HestonParams] = None
    rebalancing: str = "continuous"
    histogram: bool = True
    block_size: int = 100

    def __post_init__(self):
        if self.n_paths < 2:
            raise ValueError("need at least two paths")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        PathGrid.from_horizon(self.horizon, self.delta)
        if self.heston is not None and isinstance(self.strategy, OptimalStrategyConfig):
            raise ValueError("the EMA strategy assumes constant volatility; use KalmanAgent under Heston")

    @property
    def model(self) -> str:
        return "ou-gbm" if self.heston is None else "heston"

    @property
    def grid(self) -> PathGrid:
        return PathGrid.from_horizon(self.horizon, self.delta)


@dataclass
class McSummary:
    mean: float
    stderr: float
    stdev: float
    n_paths: int
    bankrupts: int
    histogram: Optional[tuple[np.ndarray, np.ndarray]] = None
    values: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        hist = None
        if self.histogram is not None:
            edges, counts = self.histogram
            hist = {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}
        return {
            "mean": float(self.mean),
            "stderr": float(self.stderr),
            "m_paths": int(self.n_paths),
            "bankrupts": int(self.bankrupts),
            "histogram": hist,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def simulate_block(config: McExperimentConfig, lo: int, hi: int) -> dict[str, np.ndarray]:
    grid = config.grid
    rngs = [path_rng(config.seed, i) for i in range(lo, hi)]
    if config.heston is None:
        return ou_gbm_batch(config.params, grid, rngs)
    return heston_batch(config.params, config.heston, grid, rngs)


def _spot_variance(config: McExperimentConfig, paths: dict) -> Union[float, np.ndarray]:
    if config.heston is None:
        return config.params.sigma_s**2
    return paths["variances"][:, :-1]


def strategy_block(config: McExperimentConfig, paths: dict) -> tuple[np.ndarray, np.ndarray]:
    """Annualized log-returns and ruin flags of the configured strategy on a block of paths."""
    dt = config.delta
    strat = config.strategy
    var = _spot_variance(config, paths)
    y = paths["returns"]
    simple = y * dt
    start = 0
    if isinstance(strat, OptimalStrategyConfig):
        alloc = misspecified_allocations(y, var, strat.m, strat.tau, dt)
    elif isinstance(strat, KalmanAgent):
        v = np.broadcast_to(var, y.shape)
        alloc = kalman_allocations(y, v, strat.lambda_a, strat.sigma_mu_a, dt, strat.prior_var)
    elif isinstance(strat, CrossMaConfig):
        s = paths["prices"]
        alloc, start = crossma_allocations(s, strat, dt)
        simple = s[:, start + 1 :] / s[:, start:-1] - 1.0
    else:
        raise TypeError(f"unsupported strategy {strat!r}")
    qv = np.broadcast_to(np.maximum(var, 0.0) * dt, y.shape)[:, start:]
    log_w = np.empty(y.shape[0])
    ruined = np.zeros(y.shape[0], dtype=bool)
    for j in range(y.shape[0]):
        tr = _track(alloc[j], simple[j], config.rebalancing, qv[j])
        log_w[j] = tr.final
        ruined[j] = tr.bankrupt
    active = (y.shape[1] - start) * dt
    return log_w / active, ruined


def _run_block(args) -> tuple[np.ndarray, np.ndarray]:
    config, lo, hi = args
    return strategy_block(config, simulate_block(config, lo, hi))


def _blocks(n: int, size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def map_blocks(fn, config, n_paths: int, block_size: int, workers: int = 1) -> list:
    jobs = [(config, lo, hi) for lo, hi in _blocks(n_paths, block_size)]
    if workers <= 1 or len(jobs) == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def summarize(values: np.ndarray, ruined: np.ndarray, histogram: bool = True) -> McSummary:
    """Mean, standard error and histogram of per-path annualized log-returns.

    Ruined paths are excluded from the statistics and counted.  Histogram
    bins span mean +/- 4 sample stdev; outliers are counted in the edge bins.
    """
    ok = values[~ruined]
    n_ok = ok.size
    mean = float(np.mean(ok)) if n_ok else math.nan
    sd = float(np.std(ok, ddof=1)) if n_ok > 1 else math.nan
    stderr = sd / math.sqrt(n_ok) if n_ok > 1 else math.nan
    hist = None
    if histogram and n_ok:
        half = HIST_WIDTH * sd if sd > 0 else 0.5
        lo, hi = mean - half, mean + half
        counts, edges = np.histogram(np.clip(ok, lo, hi), bins=HIST_BINS, range=(lo, hi))
        hist = (edges, counts)
    return McSummary(mean, stderr, sd, int(values.size), int(ruined.sum()), hist, values)


def run_mc(config: McExperimentConfig, workers: int = 1) -> McSummary:
    """Simulate, trade and aggregate ``ln(wealth_T) / T`` over all paths.

    T is the active trading horizon: the full horizon for the optimal
    strategies, the horizon minus the long-window warm-up for cross-MA.
    """
    parts = map_blocks(_run_block, config, config.n_paths, config.block_size, workers)
    values = np.concatenate([p[0] for p in parts])
    ruined = np.concatenate([p[1] for p in parts])
    return summarize(values, ruined, config.histogram)


# --- moment and filter-variance estimators -------------------------------------------


@dataclass(frozen=True)
class _MomentJob:
    params: TrendModelParams
    l1: float
    l2: float
    horizon: float
    delta: float
    seed: int
    tau: Optional[float] = None


def _moment_block(args):
    job, lo, hi = args
    grid = PathGrid.from_horizon(job.horizon, job.delta)
    out = ou_gbm_batch(job.params, grid, [path_rng(job.seed, i) for i in range(lo, hi)])
    if job.tau is not None:
        return ema_run(out["returns"], job.tau, job.delta)[:, -1], None
    rel = np.log(out["prices"])
    n1, n2 = window_steps(job.l1, job.delta), window_steps(job.l2, job.delta)
    x = rel[:, -n1:].mean(axis=1) - rel[:, -n2:].mean(axis=1)
    return x, out["trends"][:, -1]


@dataclass
class Estimate:
    value: float
    stderr: float


def _var_estimate(x: np.ndarray) -> Estimate:
    d = (x - x.mean()) ** 2
    return Estimate(float(np.var(x, ddof=1)), float(np.std(d, ddof=1) / math.sqrt(x.size)))


def mc_crossma_moments(
    p: TrendModelParams,
    l1: float,
    l2: float,
    horizon: float,
    n_paths: int,
    seed: int = 0,
    delta: float = 1.0 / 252,
    workers: int = 1,
    block_size: int = 250,
) -> dict[str, Estimate]:
    """Ensemble estimates of E[X_T], Var[X_T] and Cov[X_T, mu_T] for the log-GMA gap."""
    job = _MomentJob(p, l1, l2, horizon, delta, seed)
    parts = map_blocks(_moment_block, job, n_paths, block_size, workers)
    x = np.concatenate([q[0] for q in parts])
    mu = np.concatenate([q[1] for q in parts])
    n = x.size
    prod = (x - x.mean()) * (mu - mu.mean())
    return {
        "mean_gap": Estimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(n))),
        "asym_var": _var_estimate(x),
        "cov_limit": Estimate(float(prod.sum() / (n - 1)), float(prod.std(ddof=1) / math.sqrt(n))),
    }


def mc_filter_variance(
    p: TrendModelParams,
    tau: float,
    horizon: float,
    n_paths: int,
    seed: int = 0,
    delta: float = 1.0 / 252,
    workers: int = 1,
    block_size: int = 250,
) -> Estimate:
    """Ensemble variance of the EMA trend filter at the end of the horizon."""
    job = _MomentJob(p, 0.0, 0.0, horizon, delta, seed, tau=tau)
    parts = map_blocks(_moment_block, job, n_paths, block_size, workers)
    return _var_estimate(np.concatenate([q[0] for q in parts]))


# --- sweeps ----------------------------------------------------------------------------

RATE_COLUMNS = ["sigma_mu", "rate_optimal_cf", "rate_crossma_cf"]
RATE_MC_COLUMNS = ["rate_optimal_mc", "se_optimal", "rate_crossma_mc", "se_crossma"]
DURATION_COLUMNS = ["lambda", "snr", "tau_star", "feasible", "tau_min", "tau_opt"]


def sweep_rates(
    sigma_mus: Iterable[float],
    lambda_: float,
    sigma_s: float,
    optimal: OptimalStrategyConfig,
    crossma: CrossMaConfig,
    n_paths: int = 0,
    horizon: float = 100.0,
    seed: int = 0,
    delta: float = 1.0 / 252,
    workers: int = 1,
) -> list[dict]:
    """Closed-form (and, with ``n_paths > 0``, simulated) rates along a sigma_mu grid."""
    rows = []
    for sm in sigma_mus:
        p = TrendModelParams(lambda_, sm, sigma_s)
        row = {
            "sigma_mu": sm,
            "rate_optimal_cf": misspecified_rate(p, optimal),
            "rate_crossma_cf": crossma_rate(p, crossma),
        }
        if n_paths > 0:
            for name, strat in (("optimal", optimal), ("crossma", crossma)):
                cfg = McExperimentConfig(
                    p, strat, horizon=horizon, n_paths=n_paths, seed=seed, delta=delta, histogram=False
                )
                s = run_mc(cfg, workers)
                row[f"rate_{name}_mc"] = s.mean
                row[f"se_{name}"] = s.stderr
        rows.append(row)
    return rows


def sweep_durations(lambdas: Sequence[float], snrs: Sequence[float], m: float = 1.0) -> list[dict]:
    """tau* and the mis-specified (tau_min, tau_opt) on a (lambda, SNR) grid.

    Infeasible points carry ``feasible=False`` and no tau_min/tau_opt.
    """
    rows = []
    for lam in lambdas:
        for snr in snrs:
            p = TrendModelParams.from_snr(lam, snr)
            d = optimal_duration(p, m)
            rows.append(
                {
                    "lambda": lam,
                    "snr": snr,
                    "tau_star": derived_quantities(p).tau_star,
                    "feasible": d.feasible,
                    "tau_min": d.tau_min if d.feasible else None,
                    "tau_opt": d.tau_opt if d.feasible else None,
                }
            )
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_table(rows: Sequence[dict], fh, columns: Optional[Sequence[str]] = None) -> None:
    """Write rows as CSV; floats use the shortest round-trip representation."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
