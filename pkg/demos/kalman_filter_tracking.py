"""Kalman trend filter on one simulated path.

Shows the discrete filter's gain settling to the Riccati limit and its
estimate merging with the steady-state corrected EMA.
"""

import numpy as np

from trendrobust import PathGrid, TrendModelParams, discrete_kalman_run, simulate_ou_gbm, steady_state_kalman_run
from trendrobust.filters import steady_state_gain

P = TrendModelParams(1.0, 0.9, 0.3)
DT = 1 / 252


def main():
    path = simulate_ou_gbm(P, PathGrid.from_horizon(10.0), seed=3)
    y = path.returns
    kf = discrete_kalman_run(y, np.full(y.size, P.sigma_s**2), P.lambda_, P.sigma_mu, DT)
    ss = steady_state_kalman_run(y, P, DT)

    print(f"steady gain per step {steady_state_gain(P.lambda_, P.sigma_mu, P.sigma_s**2, DT):.6e}")
    for year in (0, 1, 2, 5, 9):
        k = year * 252
        print(
            f"year {year}: trend={path.trends[k + 1]:+.3f} kalman={kf.estimate[k]:+.3f} "
            f"steady={ss[k]:+.3f} error var={kf.error_var[k]:.4f}"
        )
    rmse_kf = np.sqrt(np.mean((kf.estimate[252:] - path.trends[253:]) ** 2))
    print(f"tracking RMSE after the first year: {rmse_kf:.3f}")


if __name__ == "__main__":
    main()
