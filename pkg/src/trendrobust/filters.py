"""Trend estimators fed with per-step instantaneous returns.

All filters take ``returns[k] = (S[k+1] - S[k]) / (delta S[k])`` and start
from a zero estimate.  Output element ``k`` is the estimate *after* seeing
``returns[k]``, so output length equals input length and the estimate
available when deciding the allocation for step k + 1 is ``out[k]``.
Inputs may be 2-D (paths x steps); filtering runs along the last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .analytics import TrendModelParams, derived_quantities


@dataclass
class FilterState:
    """Filtered trend means and their error variances (Kalman filter only)."""

    estimate: np.ndarray
    error_var: Optional[np.ndarray] = None


def ema_run(returns, tau: float, delta: float) -> np.ndarray:
    """Explicit-Euler exponential average ``m' = m + (delta / tau) (y - m)``."""
    if not delta > 0 or not tau > 0:
        raise ValueError("tau and delta must be positive")
    if delta >= tau:
        raise ValueError(f"delta={delta} must be smaller than tau={tau}")
    w = delta / tau
    y = np.asarray(returns, dtype=float)
    return lfilter([w], [1.0, -(1.0 - w)], y, axis=-1)


def steady_state_kalman_run(returns, p: TrendModelParams, delta: float) -> np.ndarray:
    """Steady-state Kalman filter as the corrected EMA ``m* ema(tau*)``."""
    d = derived_quantities(p)
    return d.m_star * ema_run(returns, d.tau_star, delta)


def kalman_noise(lambda_a: float, sigma_mu_a: float, delta: float) -> tuple[float, float]:
    """Transition coefficient and process-noise variance of the sampled OU trend."""
    phi = math.exp(-lambda_a * delta)
    q = sigma_mu_a**2 * -math.expm1(-2.0 * lambda_a * delta) / (2.0 * lambda_a)
    return phi, q


def discrete_kalman_run(
    returns,
    variances,
    lambda_a: float,
    sigma_mu_a: float,
    delta: float,
    prior_var: Optional[float] = None,
) -> FilterState:
    """Scalar Kalman filter of the trend with time-varying observation noise.

    ``variances[k]`` is the spot variance V_k known when ``returns[k]``
    (the return over k -> k + 1) is observed; the observation noise
    variance is ``V_k / delta``.  The agent's parameters ``lambda_a`` and
    ``sigma_mu_a`` may differ from the truth.  The prior is ``N(0,
    prior_var)`` with ``prior_var`` defaulting to the agent's stationary
    trend variance ``sigma_mu_a**2 / (2 lambda_a)``.
    """
    if not lambda_a > 0 or not sigma_mu_a >= 0 or not delta > 0:
        raise ValueError("need lambda_a > 0, sigma_mu_a >= 0, delta > 0")
    y = np.asarray(returns, dtype=float)
    r = np.broadcast_to(np.asarray(variances, dtype=float), y.shape) / delta
    if np.any(~(r > 0)):
        raise ValueError("observation variances must be positive")
    phi, q = kalman_noise(lambda_a, sigma_mu_a, delta)
    if prior_var is None:
        prior_var = sigma_mu_a**2 / (2.0 * lambda_a)

    n = y.shape[-1]
    mean = np.empty_like(y)
    err = np.empty_like(y)
    m = np.zeros(y.shape[:-1])
    pv = np.full(y.shape[:-1], float(prior_var))
    for k in range(n):
        m_pred = phi * m
        p_pred = phi * phi * pv + q
        gain = p_pred / (p_pred + r[..., k])
        m = m_pred + gain * (y[..., k] - m_pred)
        pv = (1.0 - gain) * p_pred
        mean[..., k] = m
        err[..., k] = pv
    return FilterState(estimate=mean, error_var=err)


def steady_state_gain(lambda_a: float, sigma_mu_a: float, obs_var: float, delta: float) -> float:
    """Limit gain of :func:`discrete_kalman_run` for a constant spot variance ``obs_var``.

    Solves the scalar discrete Riccati fixed point
    ``P = (phi**2 P + q) R / (phi**2 P + q + R)`` with ``R = obs_var / delta``.
    """
    phi, q = kalman_noise(lambda_a, sigma_mu_a, delta)
    r = obs_var / delta
    # predicted variance: s = phi^2 s r / (s + r) + q  <=>  s^2 + s (r (1 - phi^2) - q) - q r = 0
    b = r * (1.0 - phi * phi) - q
    s = 0.5 * (-b + math.sqrt(b * b + 4.0 * q * r))
    return s / (s + r)
