"""Self-financing wealth engines driven by the trend filters.

The allocation chosen at step k uses information up to S_k and is held
over step k -> k + 1.  Two wealth mechanics are available:

``rebalancing="step"``
    buy-and-hold within the step, ``P[k+1] = P[k] (1 + w_k r_k)`` with the
    simple return r_k.  A step with ``1 + w_k r_k <= 0`` ruins the portfolio;
    the track is flagged and its log-wealth is ``-inf`` from there on.
``rebalancing="continuous"``
    the fraction w_k is kept constant *within* the step, which for a
    log-normal step gives exactly
    ``ln P[k+1] - ln P[k] = w_k dlnS_k + w_k (1 - w_k) v_k delta / 2``
    where v_k is the spot variance over the step.  This is the
    continuous-trading portfolio the asymptotic rates describe and it cannot
    go bankrupt.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .analytics import CrossMaConfig
from .filters import discrete_kalman_run, ema_run

# Floor applied to the (full-truncation) spot variance before dividing by it.
VARIANCE_FLOOR = 1e-10


@dataclass
class WealthTrack:
    """Log-wealth ``ln(P_k / P_start)`` and the allocation held over each step.

    ``start`` is the path index of the first rebalance, so
    ``log_wealth[j]`` refers to path index ``start + j``.
    """

    log_wealth: np.ndarray
    allocations: np.ndarray
    bankrupt: bool = False
    start: int = 0

    @property
    def final(self) -> float:
        return float(self.log_wealth[-1])

    def to_csv(self, dest, delta: float) -> None:
        """Rows ``t,log_wealth,allocation``; the last row has no allocation."""
        own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
        fh = open(dest, "w", newline="") if own else dest
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "log_wealth", "allocation"])
            n = self.log_wealth.shape[-1]
            for j in range(n):
                a = f"{self.allocations[j]:.17g}" if j < n - 1 else ""
                w.writerow([f"{(self.start + j) * delta:.17g}", f"{self.log_wealth[j]:.17g}", a])
        finally:
            if own:
                fh.close()


def compound(allocations, step_returns):
    """Log-wealth paths and ruin flags for allocations held over simple step returns.

    Works along the last axis; returns ``(log_wealth, bankrupt)`` where
    ``log_wealth`` has one more element than the inputs and starts at 0.
    """
    gross = 1.0 + np.asarray(allocations) * np.asarray(step_returns)
    ruined = gross <= 0.0
    steps = np.log(np.where(ruined, 1.0, gross))
    log_w = np.zeros(gross.shape[:-1] + (gross.shape[-1] + 1,))
    np.cumsum(steps, axis=-1, out=log_w[..., 1:])
    bankrupt = ruined.any(axis=-1)
    if np.any(bankrupt):
        dead = np.cumsum(ruined, axis=-1) > 0
        log_w[..., 1:][dead] = -np.inf
    return log_w, bankrupt


def _lagged(estimates: np.ndarray) -> np.ndarray:
    """Estimate available before each step: 0 first, then ``estimates[:-1]``."""
    out = np.zeros_like(estimates)
    out[..., 1:] = estimates[..., :-1]
    return out


def misspecified_allocations(returns, sigma_s_sq: float, m: float, tau: float, delta: float):
    return m * _lagged(ema_run(returns, tau, delta)) / sigma_s_sq


def kalman_allocations(returns, variances, lambda_a: float, sigma_mu_a: float, delta: float, prior_var=None):
    v = np.maximum(np.asarray(variances, dtype=float), VARIANCE_FLOOR)
    est = discrete_kalman_run(returns, v, lambda_a, sigma_mu_a, delta, prior_var).estimate
    return _lagged(est) / v


def continuous_log_wealth(allocations, log_increments, step_variance):
    """Log-wealth under constant-proportion trading inside each step.

    ``step_variance`` is the integrated variance of ln S over each step
    (``sigma_s**2 * delta`` or ``V_k**+ * delta``), scalar or array.
    """
    w = np.asarray(allocations)
    inc = w * np.asarray(log_increments) + 0.5 * w * (1.0 - w) * step_variance
    log_w = np.zeros(inc.shape[:-1] + (inc.shape[-1] + 1,))
    np.cumsum(inc, axis=-1, out=log_w[..., 1:])
    return log_w


def _track(alloc, simple, rebalancing, step_variance=None, start=0) -> WealthTrack:
    alloc = np.asarray(alloc)
    if rebalancing == "step":
        log_w, bankrupt = compound(alloc, simple)
        return WealthTrack(log_w, alloc, bool(np.any(bankrupt)), start)
    if rebalancing == "continuous":
        if step_variance is None:
            raise ValueError("continuous rebalancing needs the spot variance over each step")
        log_w = continuous_log_wealth(alloc, np.log1p(simple), step_variance)
        return WealthTrack(log_w, alloc, False, start)
    raise ValueError(f"unknown rebalancing {rebalancing!r}")


def run_misspecified_optimal(
    returns, sigma_s_sq: float, m: float, tau: float, delta: float, rebalancing: str = "step"
) -> WealthTrack:
    """EMA strategy ``w_k = m * ema_k / sigma_s_sq`` under constant volatility.

    ``returns`` are per-year instantaneous returns ``(S[k+1] - S[k]) / (delta S[k])``.
    """
    if not sigma_s_sq > 0:
        raise ValueError("sigma_s_sq must be positive")
    y = np.asarray(returns, dtype=float)
    alloc = misspecified_allocations(y, sigma_s_sq, m, tau, delta)
    return _track(alloc, y * delta, rebalancing, sigma_s_sq * delta)


def run_kalman_optimal(
    returns,
    variances,
    lambda_a: float,
    sigma_mu_a: float,
    delta: float,
    prior_var=None,
    rebalancing: str = "step",
) -> WealthTrack:
    """Log-optimal allocation ``w_k = mu_hat_k / V_k`` with a Kalman trend estimate.

    ``variances[k]`` is V_k, observable when the allocation for step k is set.
    """
    y = np.asarray(returns, dtype=float)
    v = np.asarray(variances, dtype=float)
    alloc = kalman_allocations(y, v, lambda_a, sigma_mu_a, delta, prior_var)
    return _track(alloc, y * delta, rebalancing, np.maximum(v, 0.0) * delta)


def log_return_decomposition(returns, sigma_s_sq: float, m: float, tau: float, delta: float):
    """Split the EMA strategy's log-return into option profile and trading impact.

    Returns ``(option_profile, trading_impact)``: the continuous-time
    identity ``d ln P = (m tau / 2 sigma_s^2) d(ema^2) + m (ema^2 (1 - m/2) / sigma_s^2 - 1/(2 tau)) dt``
    summed on the grid.  Their sum approaches the compounded log-wealth as
    ``delta -> 0``.
    """
    est = ema_run(returns, tau, delta)
    before = _lagged(est)
    option = m * tau / (2.0 * sigma_s_sq) * est[..., -1] ** 2
    impact = np.sum(m * (before**2 * (1.0 - 0.5 * m) / sigma_s_sq - 0.5 / tau), axis=-1) * delta
    return option, impact


def window_steps(length: float, delta: float) -> int:
    """Window length in grid steps; a zero length means the spot price itself."""
    return max(1, int(round(length / delta)))


def _mean_log(rel_log: np.ndarray, window: int) -> np.ndarray:
    """Trailing mean over ``window`` points, defined from index window - 1 (NaN before)."""
    cs = np.zeros(rel_log.shape[:-1] + (rel_log.shape[-1] + 1,))
    np.cumsum(rel_log, axis=-1, out=cs[..., 1:])
    out = np.full(rel_log.shape, np.nan)
    out[..., window - 1 :] = (cs[..., window:] - cs[..., :-window]) / window
    return out


def geometric_ma(prices, window_steps: int) -> np.ndarray:
    """Discrete geometric moving average over the last ``window_steps`` prices.

    Entries before index ``window_steps - 1`` are NaN.
    """
    s = np.asarray(prices, dtype=float)
    if window_steps < 1:
        raise ValueError("window must be at least one step")
    if s.shape[-1] < window_steps:
        raise ValueError(f"series of length {s.shape[-1]} is shorter than the window {window_steps}")
    if np.any(s <= 0):
        raise ValueError("prices must be positive")
    base = np.log(s[..., :1])
    return np.exp(base + _mean_log(np.log(s) - base, window_steps))


def crossma_allocations(prices, c: CrossMaConfig, delta: float):
    """Allocations ``gamma + alpha * 1{G1 > G2}`` for every step from the warm-up on.

    Returns ``(allocations, start)``; ``allocations[j]`` is held over step
    ``start + j``.  Comparison is done on mean log-prices relative to S_0 so
    that ties are exact for flat series; a tie allocates ``gamma``.
    """
    s = np.asarray(prices, dtype=float)
    n1, n2 = window_steps(c.l1, delta), window_steps(c.l2, delta)
    if n1 >= n2:
        raise ValueError(f"short window ({n1} steps) must be shorter than long window ({n2} steps)")
    if s.shape[-1] < n2 + 1:
        raise ValueError(f"need more than {n2} prices, got {s.shape[-1]}")
    rel = np.log(s) - np.log(s[..., :1])
    start = n2 - 1
    short = _mean_log(rel, n1)[..., start:-1]
    long_ = _mean_log(rel, n2)[..., start:-1]
    return c.gamma + c.alpha * (short > long_), start


def run_crossma(
    prices, c: CrossMaConfig, delta: float, rebalancing: str = "step", variances=None
) -> WealthTrack:
    """Cross moving-average strategy on a price series.

    Wealth starts once the long window is full (index ``start``); window
    lengths in ``c`` are in years and converted to steps with ``delta``.
    ``variances`` (per step, scalar or one per price step) is only needed
    for continuous rebalancing.
    """
    s = np.asarray(prices, dtype=float)
    if np.any(s <= 0):
        raise ValueError("prices must be positive")
    alloc, start = crossma_allocations(s, c, delta)
    step = s[..., start + 1 :] / s[..., start:-1] - 1.0
    qv = None
    if variances is not None:
        v = np.maximum(np.asarray(variances, dtype=float), 0.0)
        qv = (v[..., start:] if v.ndim else v) * delta
    return _track(alloc, step, rebalancing, qv, start)
