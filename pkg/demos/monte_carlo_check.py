"""Monte Carlo check of both strategies' asymptotic log-returns.

Pass a path count as the first argument (default 500) to trade accuracy
for speed; the closed-form values sit inside the printed 3-se bands.
"""

import sys

from trendrobust import (
    CrossMaConfig,
    McExperimentConfig,
    OptimalStrategyConfig,
    TrendModelParams,
    crossma_rate,
    misspecified_rate,
    run_mc,
)

P = TrendModelParams(1.0, 0.9, 0.3)


def main(n_paths=500):
    for strat, target in (
        (OptimalStrategyConfig(1.0, 1.0), misspecified_rate(P, OptimalStrategyConfig(1.0, 1.0))),
        (CrossMaConfig(-1.0, 2.0, 5 / 252, 1.0), crossma_rate(P, CrossMaConfig(-1.0, 2.0, 5 / 252, 1.0))),
    ):
        s = run_mc(McExperimentConfig(P, strat, horizon=100.0, n_paths=n_paths, seed=0))
        print(f"{type(strat).__name__:22s} closed form {target:.4f}  MC {s.mean:.4f} +/- {3 * s.stderr:.4f}")

    # daily simple compounding at this leverage can wipe paths out
    s = run_mc(McExperimentConfig(P, OptimalStrategyConfig(1.0, 1.0), n_paths=n_paths, rebalancing="step"))
    print(f"simple daily compounding: {s.bankrupts}/{n_paths} paths ruined, survivors {s.mean:.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 500)
