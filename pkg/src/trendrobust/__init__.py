"""Trend-following under an unobserved Ornstein-Uhlenbeck drift.

Closed-form growth rates, path simulation, trend filters, wealth engines,
Monte Carlo verification and CSV backtests.
"""

from .analytics import (
    CrossMaConfig,
    CrossMaMoments,
    DerivedQuantities,
    DurationResult,
    OptimalStrategyConfig,
    TrendModelParams,
    crossma_moments,
    crossma_rate,
    derived_quantities,
    filter_variance,
    misspecified_rate,
    optimal_duration,
    single_ma_rate,
    std_normal_cdf,
    std_normal_pdf,
    well_specified_rate,
)
from .backtest import (
    BacktestProtocol,
    BacktestReport,
    PriceSeries,
    annualized_sharpe,
    load_price_csv,
    run_backtest,
)
from .filters import FilterState, discrete_kalman_run, ema_run, steady_state_kalman_run
from .montecarlo import KalmanAgent, McExperimentConfig, McSummary, run_mc, sweep_durations, sweep_rates
from .simulation import DEFAULT_HESTON, HestonParams, PathGrid, SimulatedPath, simulate_heston, simulate_ou_gbm
from .strategies import WealthTrack, geometric_ma, run_crossma, run_kalman_optimal, run_misspecified_optimal

__version__ = "0.1.0"
