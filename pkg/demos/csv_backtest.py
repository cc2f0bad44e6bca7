"""Backtest both strategies on a date,close CSV file.

Without an argument a 16-year simulated series is written to a temporary
file first, so the script runs end to end on its own.
"""

import datetime as dt
import sys
import tempfile
from pathlib import Path

from trendrobust import PathGrid, PriceSeries, TrendModelParams, load_price_csv, run_backtest, simulate_ou_gbm
from trendrobust.backtest import business_days, write_price_csv


def synthetic_csv(folder):
    path = simulate_ou_gbm(TrendModelParams(1.0, 0.9, 0.3), PathGrid.from_horizon(16.0), seed=2024)
    series = PriceSeries(business_days(dt.date(2000, 1, 3), path.prices.size), path.prices, "synthetic")
    f = Path(folder) / "synthetic.csv"
    write_price_csv(series, f)
    return f


def main(files):
    with tempfile.TemporaryDirectory() as tmp:
        files = files or [synthetic_csv(tmp)]
        for f in files:
            rep = run_backtest(load_price_csv(f))
            print(f"{rep.instrument}: {rep.n_days} days, sigma_s={rep.sigma_s:.3f}")
            print(f"  EMA (tau=252d, m=0.1) Sharpe {rep.sharpe_optimal:.3f}")
            print(f"  5d/252d crossover    Sharpe {rep.sharpe_crossma:.3f}")


if __name__ == "__main__":
    main(sys.argv[1:])
