"""Seedable path generators for the OU-trend model and its Heston extension.

Every path is a pure function of ``(params, grid, seed)``.  Monte Carlo runs
derive one independent stream per path with :func:`path_rng`, so a path's
draws do not depend on how many other paths are simulated or where.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.signal import lfilter

from .analytics import TrendModelParams

TRADING_DAYS = 252

SeedLike = Union[int, np.random.Generator]


@dataclass(frozen=True)
class PathGrid:
    n_steps: int
    delta: float = 1.0 / TRADING_DAYS

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @classmethod
    def from_horizon(cls, horizon: float, delta: float = 1.0 / TRADING_DAYS) -> "PathGrid":
        n = round(horizon / delta)
        if not math.isclose(n * delta, horizon, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"horizon {horizon} is not a multiple of delta {delta}")
        return cls(n_steps=n, delta=delta)

    @property
    def horizon(self) -> float:
        return self.n_steps * self.delta

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.delta


class FellerWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HestonParams:
    """Variance dynamics ``dV = kappa (v_inf - V) dt + eps sqrt(V) dW^V``."""

    kappa: float
    v_inf: float
    eps: float
    rho: float
    v0: float

    def __post_init__(self):
        for name in ("kappa", "v_inf", "eps", "v0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.feller_violated:
            warnings.warn(
                f"2 kappa v_inf = {2 * self.kappa * self.v_inf:g} < eps^2 = {self.eps**2:g}; "
                "variance can hit zero (full truncation still applies)",
                FellerWarning,
                stacklevel=3,
            )

    @property
    def feller_violated(self) -> bool:
        return 2.0 * self.kappa * self.v_inf < self.eps**2


# kappa=4, eps=5%, V_inf = V_0 = 0.3**2, rho = -60%
DEFAULT_HESTON = HestonParams(kappa=4.0, v_inf=0.09, eps=0.05, rho=-0.6, v0=0.09)


@dataclass
class SimulatedPath:
    """One simulated path on a uniform grid.

    ``returns[k]`` is the per-year arithmetic return over step k -> k + 1,
    ``(S[k+1] - S[k]) / (delta S[k])``.  ``variances`` is None for the
    constant-volatility model.
    """

    times: np.ndarray
    prices: np.ndarray
    trends: np.ndarray
    returns: np.ndarray
    variances: Optional[np.ndarray] = None

    def to_csv(self, path) -> None:
        write_path_csv(self, path)


def path_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent generator for path ``index`` of an experiment seeded by ``base_seed``."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


def _as_rng(seed: SeedLike) -> np.random.Generator:
    # an integer seed gives the stream of path 0 in a Monte Carlo run with that seed
    if isinstance(seed, np.random.Generator):
        return seed
    return path_rng(int(seed), 0)


def _ou_trend(lambda_: float, sigma_mu: float, delta: float, shocks: np.ndarray) -> np.ndarray:
    """Exact OU transition from mu_0 = 0; ``shocks`` are standard normals, shape (..., n)."""
    phi = math.exp(-lambda_ * delta)
    sd = sigma_mu * math.sqrt(-math.expm1(-2.0 * lambda_ * delta) / (2.0 * lambda_))
    mu = np.zeros(shocks.shape[:-1] + (shocks.shape[-1] + 1,))
    mu[..., 1:] = lfilter([1.0], [1.0, -phi], sd * shocks, axis=-1)
    return mu


def _prices_from_log_increments(dlog: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    log_s = np.zeros(dlog.shape[:-1] + (dlog.shape[-1] + 1,))
    np.cumsum(dlog, axis=-1, out=log_s[..., 1:])
    return np.exp(log_s), np.expm1(dlog)


def ou_gbm_batch(
    p: TrendModelParams, grid: PathGrid, rngs: Sequence[np.random.Generator]
) -> dict[str, np.ndarray]:
    """Simulate one path per generator; arrays have shape (len(rngs), n_steps [+ 1])."""
    n, dt = grid.n_steps, grid.delta
    draws = np.stack([g.standard_normal((2, n)) for g in rngs])
    mu = _ou_trend(p.lambda_, p.sigma_mu, dt, draws[:, 1])
    dlog = (mu[:, :-1] - 0.5 * p.sigma_s**2) * dt + p.sigma_s * math.sqrt(dt) * draws[:, 0]
    prices, simple = _prices_from_log_increments(dlog)
    return {"prices": prices, "trends": mu, "returns": simple / dt}


def heston_batch(
    p: TrendModelParams, h: HestonParams, grid: PathGrid, rngs: Sequence[np.random.Generator]
) -> dict[str, np.ndarray]:
    """Full-truncation Heston paths with an OU trend; ``p.sigma_s`` is unused."""
    n, dt = grid.n_steps, grid.delta
    sq = math.sqrt(dt)
    draws = np.stack([g.standard_normal((3, n)) for g in rngs])
    xi_s = draws[:, 0]
    xi_v = h.rho * xi_s + math.sqrt(1.0 - h.rho**2) * draws[:, 2]
    mu = _ou_trend(p.lambda_, p.sigma_mu, dt, draws[:, 1])

    v = np.empty((len(rngs), n + 1))
    v[:, 0] = h.v0
    for k in range(n):
        vk = v[:, k]
        vp = np.maximum(vk, 0.0)
        v[:, k + 1] = vk + h.kappa * (h.v_inf - vp) * dt + h.eps * np.sqrt(vp) * sq * xi_v[:, k]
    vplus = np.maximum(v[:, :-1], 0.0)
    dlog = (mu[:, :-1] - 0.5 * vplus) * dt + np.sqrt(vplus * dt) * xi_s
    prices, simple = _prices_from_log_increments(dlog)
    return {"prices": prices, "trends": mu, "returns": simple / dt, "variances": v}


def simulate_ou_gbm(p: TrendModelParams, grid: PathGrid, seed: SeedLike) -> SimulatedPath:
    """Price with an unobserved OU trend under constant volatility.

    The trend uses the exact OU transition; the price uses a log-Euler step
    ``ln S' = ln S + (mu - sigma_s**2 / 2) delta + sigma_s sqrt(delta) xi``,
    so prices stay positive.  S_0 = 1 and mu_0 = 0.
    """
    out = ou_gbm_batch(p, grid, [_as_rng(seed)])
    return SimulatedPath(grid.times, out["prices"][0], out["trends"][0], out["returns"][0])


def simulate_heston(
    p: TrendModelParams, h: HestonParams, grid: PathGrid, seed: SeedLike
) -> SimulatedPath:
    """OU trend with Heston variance, full truncation scheme.

    Only ``p.lambda_`` and ``p.sigma_mu`` are used.  Price and variance
    shocks are standard normals with correlation ``h.rho``.
    """
    out = heston_batch(p, h, grid, [_as_rng(seed)])
    return SimulatedPath(
        grid.times, out["prices"][0], out["trends"][0], out["returns"][0], out["variances"][0]
    )


def write_path_csv(path: SimulatedPath, dest) -> None:
    """Write ``t,price,trend[,variance]`` rows with 17 significant digits."""
    cols = [path.times, path.prices, path.trends]
    header = ["t", "price", "trend"]
    if path.variances is not None:
        cols.append(path.variances)
        header.append("variance")
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([f"{x:.17g}" for x in row])
    finally:
        if own:
            fh.close()
