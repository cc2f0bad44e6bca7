"""Closed-form performance formulas for the unobserved OU-trend model.

The model is

    dS/S = mu dt + sigma_s dW^S,      dmu = -lambda mu dt + sigma_mu dW^mu,

with mu_0 = 0.  Every function here is a pure scalar evaluator; durations are
in years and rates are annualized expected log-returns.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

logger = logging.getLogger(__name__)

# Relative width of the tau = 1/lambda branch in the filter-variance formula.
SINGULAR_TOL = 1e-8

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TrendModelParams:
    """True parameters of the trend model.

    ``sigma_mu = 0`` is accepted: every closed form is continuous there and
    the rate sweeps start at zero trend volatility.
    """

    lambda_: float
    sigma_mu: float
    sigma_s: float

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ValueError(f"lambda must be positive, got {self.lambda_}")
        if not self.sigma_mu >= 0:
            raise ValueError(f"sigma_mu must be non-negative, got {self.sigma_mu}")
        if not self.sigma_s > 0:
            raise ValueError(f"sigma_s must be positive, got {self.sigma_s}")

    @classmethod
    def from_snr(cls, lambda_: float, snr: float, sigma_s: float = 0.3) -> "TrendModelParams":
        """Build parameters hitting a target signal-to-noise ratio."""
        if snr < 0:
            raise ValueError(f"snr must be non-negative, got {snr}")
        return cls(lambda_, math.sqrt(2.0 * lambda_ * sigma_s**2 * snr), sigma_s)

    @property
    def snr(self) -> float:
        return self.sigma_mu**2 / (2.0 * self.lambda_ * self.sigma_s**2)

    @property
    def beta(self) -> float:
        return math.sqrt(1.0 + self.sigma_mu**2 / (self.lambda_**2 * self.sigma_s**2))


@dataclass(frozen=True)
class DerivedQuantities:
    beta: float
    snr: float
    tau_star: float
    m_star: float


@dataclass(frozen=True)
class OptimalStrategyConfig:
    """EMA-based strategy: allocation ``m * ema(tau) / sigma_s**2``."""

    m: float
    tau: float

    def __post_init__(self):
        if not self.m >= 0:
            raise ValueError(f"m must be non-negative, got {self.m}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class CrossMaConfig:
    """Allocation ``gamma + alpha * 1{G(L1) > G(L2)}``; ``l1 = 0`` means a single MA."""

    gamma: float
    alpha: float
    l1: float
    l2: float

    def __post_init__(self):
        if not 0 <= self.l1 < self.l2:
            raise ValueError(f"need 0 <= l1 < l2, got l1={self.l1}, l2={self.l2}")


@dataclass(frozen=True)
class CrossMaMoments:
    mean_gap: float
    asym_var: float
    cov_limit: float


@dataclass(frozen=True)
class DurationResult:
    feasible: bool
    tau_min: float
    tau_opt: float


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) * _INV_SQRT_2PI


def std_normal_cdf(x: float) -> float:
    # erfc keeps full relative accuracy in the lower tail
    return 0.5 * math.erfc(-x / _SQRT2)


def derived_quantities(p: TrendModelParams) -> DerivedQuantities:
    """beta, SNR, optimal Kalman duration tau* and leverage m* = (beta - 1) / beta."""
    beta = p.beta
    return DerivedQuantities(
        beta=beta,
        snr=p.snr,
        tau_star=1.0 / (p.lambda_ * beta),
        m_star=(beta - 1.0) / beta,
    )


def _exp_gap(lam: float, k: float, t: float) -> float:
    """(exp(-lam t) - exp(-k t)) / (k - lam), stable for all k, lam > 0."""
    a = k - lam
    if abs(a) < SINGULAR_TOL * lam:
        logger.debug("filter_variance: tau = 1/lambda branch (k - lambda = %g)", a)
        # symmetric expansion around the midpoint rate; error O(a^2 t^3)
        x = 0.5 * a * t
        return t * math.exp(-0.5 * (k + lam) * t) * (1.0 + x * x / 6.0)
    if a > 0:
        return math.exp(-lam * t) * -math.expm1(-a * t) / a
    return math.exp(-k * t) * math.expm1(a * t) / a


def filter_variance(p: TrendModelParams, tau: float, t: float = math.inf) -> float:
    """Variance of the EMA trend filter of duration ``tau`` at time ``t``.

    The filter starts at 0 at t = 0.  ``t = inf`` (the default) gives the
    stationary variance ``sigma_s**2 / (2 tau) + sigma_mu**2 / (2 lambda (1 + lambda tau))``.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not t >= 0:
        raise ValueError(f"t must be non-negative, got {t}")
    k = 1.0 / tau
    lam = p.lambda_
    noise = 0.5 * p.sigma_s**2 * k
    trend = p.sigma_mu**2 * k / (2.0 * lam * (k + lam))
    if math.isinf(t):
        return noise + trend
    settle = -math.expm1(-2.0 * k * t)
    gap = _exp_gap(lam, k, t)
    transient = (k * k * p.sigma_mu**2 / lam) * (
        0.5 * gap * gap + math.exp(-k * t) * gap / (k + lam)
    )
    return noise * settle + trend * settle - transient


def misspecified_rate(p: TrendModelParams, c: OptimalStrategyConfig) -> float:
    """Asymptotic expected log-return per year of the EMA strategy ``(m, tau)``."""
    m, tau, lam, snr = c.m, c.tau, p.lambda_, p.snr
    return m * (2.0 * tau * (2.0 - m) * snr - m * (lam * tau + 1.0)) / (
        4.0 * tau * (lam * tau + 1.0)
    )


def misspecified_rate_beta_form(p: TrendModelParams, c: OptimalStrategyConfig) -> float:
    """Same rate written with beta instead of SNR; kept as an algebraic cross-check."""
    m, tau, lam = c.m, c.tau, p.lambda_
    b2 = p.beta**2
    h = tau + 1.0 / lam
    return m * (tau * (b2 - 1.0) * (2.0 - m) - m * h) / (4.0 * tau * h)


def well_specified_rate(p: TrendModelParams) -> float:
    """Rate of the steady-state Kalman strategy (m*, tau*)."""
    lam, snr = p.lambda_, p.snr
    return 0.5 * (snr + lam - math.sqrt(lam * (lam + 2.0 * snr)))


def optimal_duration(p: TrendModelParams, m: float) -> DurationResult:
    """Break-even and rate-maximizing EMA durations for leverage ``m``.

    The rate is ``m (B tau - m) / (4 tau (lambda tau + 1))`` with
    ``B = 2 (2 - m) SNR - lambda m``, so a positive rate, and with it a finite
    maximizer, exists iff ``B > 0``, i.e. ``SNR / lambda > m / (2 (2 - m))``.
    Otherwise ``feasible=False`` and both durations are ``inf``.
    """
    if not 0 < m < 2:
        raise ValueError(f"m must lie in (0, 2), got {m}")
    lam, snr = p.lambda_, p.snr
    denom = 2.0 * (2.0 - m) * snr - lam * m
    if not denom > 0:
        return DurationResult(False, math.inf, math.inf)
    tau_min = m / denom
    tau_opt = (m + math.sqrt((2.0 - m) * 2.0 * m * snr / lam)) / denom
    return DurationResult(True, tau_min, tau_opt)


def _phi2(x: float) -> float:
    """(exp(x) - 1 - x) / x**2 without cancellation near 0."""
    if abs(x) < 1e-3:
        return 0.5 + x / 6.0 + x * x / 24.0 + x**3 / 120.0
    return (math.expm1(x) - x) / (x * x)


def _one_minus_exp_over(x: float) -> float:
    """(1 - exp(-x)) / x, equal to 1 at x = 0."""
    if x == 0.0:
        return 1.0
    return -math.expm1(-x) / x


def _sinhc(x: float) -> float:
    if abs(x) < 1e-4:
        return 1.0 + x * x / 6.0
    return math.sinh(x) / x


def _trend_var_shape(a: float, b: float) -> float:
    """Trend part of Var[X] in units of sigma_mu**2 / lambda**3, with a = lambda L1, b = lambda L2.

    Regrouped so that the 1/a and 1/a**2 poles cancel analytically; a = 0
    gives the single moving-average limit.
    """
    e2 = -math.expm1(-b)
    out = (b - a) ** 2 / (3.0 * b) + 1.0 / b + e2 / (b * b) - _phi2(-a)
    out -= (e2 * _one_minus_exp_over(a) + 2.0 * math.exp(-b) * _sinhc(a)) / b
    return out


def _moments(p: TrendModelParams, l1: float, l2: float) -> CrossMaMoments:
    lam, sm2, ss2 = p.lambda_, p.sigma_mu**2, p.sigma_s**2
    a, b = lam * l1, lam * l2
    mean_gap = -0.25 * ss2 * (l2 - l1)
    asym_var = ss2 * (l2 - l1) ** 2 / (3.0 * l2) + sm2 / lam**3 * _trend_var_shape(a, b)
    cov = sm2 * (_one_minus_exp_over(a) - _one_minus_exp_over(b)) / (2.0 * lam * lam)
    return CrossMaMoments(mean_gap, asym_var, cov)


def crossma_moments(p: TrendModelParams, c: CrossMaConfig) -> CrossMaMoments:
    """Long-run mean, variance and trend covariance of the log-GMA gap X = m1 - m2.

    The covariance limit carries lambda**3 in its raw form
    ``sigma_mu**2 (L2 (1 - e^{-lambda L1}) - L1 (1 - e^{-lambda L2})) / (2 lambda**3 L1 L2)``.
    """
    if c.l1 <= 0:
        raise ValueError("l1 must be positive; use single_ma_rate for l1 = 0")
    return _moments(p, c.l1, c.l2)


def rate_from_moments(p: TrendModelParams, gamma: float, alpha: float, mo: CrossMaMoments) -> float:
    """Cross-rule rate for given long-run moments of the log-GMA gap."""
    ss2 = p.sigma_s**2
    fixed = -0.5 * gamma**2 * ss2
    if alpha == 0:
        return fixed
    sd = math.sqrt(mo.asym_var)
    z = mo.mean_gap / sd
    return (
        fixed
        - 0.5 * (alpha**2 + 2.0 * alpha * gamma) * ss2 * std_normal_cdf(z)
        + alpha * mo.cov_limit / sd * std_normal_pdf(-z)
    )


def crossma_rate(p: TrendModelParams, c: CrossMaConfig) -> float:
    """Asymptotic expected log-return per year of the cross moving-average strategy."""
    if c.l1 == 0:
        return single_ma_rate(p, c.gamma, c.alpha, c.l2)
    return rate_from_moments(p, c.gamma, c.alpha, crossma_moments(p, c))


def single_ma_rate(p: TrendModelParams, gamma: float, alpha: float, l: float) -> float:
    """Rate of ``gamma + alpha * 1{S_t > G(t, l)}``, the l1 -> 0 limit of the cross rule."""
    if not l > 0:
        raise ValueError(f"window must be positive, got {l}")
    return rate_from_moments(p, gamma, alpha, _moments(p, 0.0, l))
