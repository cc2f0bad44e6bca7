"""Simulated spread of the EMA trend estimate against its closed form.

An EMA of daily returns is run over many OU-trend paths; its cross-path
variance at a few horizons is compared with the exact transient variance.
"""

from trendrobust import TrendModelParams, filter_variance
from trendrobust.montecarlo import mc_filter_variance

P = TrendModelParams(1.0, 0.9, 0.3)
TAU = 1.0
N_PATHS = 4000


def main():
    print(f"{'t':>5} {'closed form':>12} {'simulated':>10} {'se':>8}")
    for t in (0.5, 2.0, 10.0):
        est = mc_filter_variance(P, TAU, horizon=t, n_paths=N_PATHS, seed=1)
        print(f"{t:5.1f} {filter_variance(P, TAU, t):12.5f} {est.value:10.5f} {est.stderr:8.5f}")
    print(f"stationary {filter_variance(P, TAU):.5f}")


if __name__ == "__main__":
    main()
