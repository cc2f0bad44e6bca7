"""Kalman investor vs moving-average crossover under stochastic volatility.

The Kalman investor believes lambda=1, sigma_mu=0.9.  When the true trend
is fast and weak the crossover keeps a higher and tighter log-return.
"""

from trendrobust import DEFAULT_HESTON, CrossMaConfig, KalmanAgent, McExperimentConfig, TrendModelParams, run_mc

N_PATHS = 400
CROSS = CrossMaConfig(-1.0, 2.0, 5 / 252, 1.0)


def main():
    for lam, sm in ((1.0, 0.9), (2.0, 0.1), (1.0, 0.1)):
        p = TrendModelParams(lam, sm, 0.3)
        kw = dict(horizon=50.0, n_paths=N_PATHS, seed=0, heston=DEFAULT_HESTON)
        kal = run_mc(McExperimentConfig(p, KalmanAgent(1.0, 0.9), **kw))
        cma = run_mc(McExperimentConfig(p, CROSS, **kw))
        print(
            f"lambda={lam} sigma_mu={sm}: kalman {kal.mean:+.4f} (sd {kal.stdev:.4f})  "
            f"crossover {cma.mean:+.4f} (sd {cma.stdev:.4f})"
        )


if __name__ == "__main__":
    main()
