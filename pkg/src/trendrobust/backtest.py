"""Daily backtests of both strategies on close-price CSV files.

Input format: UTF-8 CSV with header ``date,close``, ISO-8601 dates in
strictly ascending order, positive decimal closes.  Rows are consecutive
business days; no calendar-gap handling is done.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .analytics import CrossMaConfig
from .filters import ema_run
from .strategies import crossma_allocations

TRADING_DAYS = 252


class PriceDataError(ValueError):
    """Base class for malformed price files."""


class MalformedHeaderError(PriceDataError):
    pass


class InvalidCloseError(PriceDataError):
    pass


class InvalidDateError(PriceDataError):
    pass


class UnsortedDatesError(PriceDataError):
    pass


class DuplicateDateError(PriceDataError):
    pass


class UndefinedSharpeError(ValueError):
    """Raised when the return series has zero dispersion."""


class SeriesTooShortError(ValueError):
    pass


@dataclass
class PriceSeries:
    dates: list[dt.date]
    closes: np.ndarray
    name: str = ""

    def __len__(self) -> int:
        return len(self.dates)


def load_price_csv(path, name: Optional[str] = None) -> PriceSeries:
    """Read and validate a ``date,close`` file.

    Each problem raises its own :class:`PriceDataError` subclass naming the
    offending line (the header is line 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "close"]:
            raise MalformedHeaderError(f"{path}: expected header 'date,close', got {header!r}")
        dates, closes = [], []
        seen = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise PriceDataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                d = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise InvalidDateError(f"{path}:{lineno}: bad date {row[0]!r}") from None
            try:
                c = float(row[1])
            except ValueError:
                raise InvalidCloseError(f"{path}:{lineno}: non-numeric close {row[1]!r}") from None
            if not math.isfinite(c) or c <= 0:
                raise InvalidCloseError(f"{path}:{lineno}: close must be positive, got {row[1]!r}")
            if d in seen:
                raise DuplicateDateError(f"{path}:{lineno}: date {d} already on line {seen[d]}")
            if dates and d < dates[-1]:
                raise UnsortedDatesError(f"{path}:{lineno}: date {d} precedes {dates[-1]}")
            seen[d] = lineno
            dates.append(d)
            closes.append(c)
    if name is None:
        name = str(getattr(path, "stem", None) or str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0])
    return PriceSeries(dates, np.asarray(closes), name)


def write_price_csv(series: PriceSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "close"])
        for d, c in zip(series.dates, series.closes):
            w.writerow([d.isoformat(), f"{c:.17g}"])


def business_days(start: dt.date, n: int) -> list[dt.date]:
    """The first ``n`` weekdays on or after ``start``."""
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def annualized_sharpe(daily_returns) -> float:
    """``mean / stdev * sqrt(252)`` with zero risk-free rate and (n - 1) stdev."""
    r = np.asarray(daily_returns, dtype=float)
    if r.size < 2:
        raise ValueError("need at least two returns")
    if np.ptp(r) == 0:
        raise UndefinedSharpeError("returns have zero dispersion")
    return float(np.mean(r) / np.std(r, ddof=1) * math.sqrt(TRADING_DAYS))


@dataclass(frozen=True)
class BacktestProtocol:
    """Windows in business days; the EMA duration is ``tau_days``."""

    tau_days: int = 252
    m: float = 0.1
    gamma: float = -1.0
    alpha: float = 2.0
    l1_days: int = 5
    l2_days: int = 252


@dataclass
class BacktestReport:
    instrument: str
    sharpe_optimal: Optional[float]
    sharpe_crossma: Optional[float]
    n_days: int
    sigma_s: float
    config: BacktestProtocol
    returns_optimal: np.ndarray = field(repr=False, default=None)
    returns_crossma: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["sigma_s"] = self.sigma_s
        return {
            "instrument": self.instrument,
            "sharpe_optimal": self.sharpe_optimal,
            "sharpe_crossma": self.sharpe_crossma,
            "n_days": self.n_days,
            "config": cfg,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _sharpe_or_none(r) -> Optional[float]:
    try:
        return annualized_sharpe(r)
    except UndefinedSharpeError:
        return None


def run_backtest(series: PriceSeries, protocol: BacktestProtocol = BacktestProtocol()) -> BacktestReport:
    """Daily-rebalanced EMA strategy vs cross moving averages on one instrument.

    sigma_s is the full-sample annualized stdev of daily relative returns,
    known from day one (a deliberate look-ahead).  Both strategies are
    scored on the same days: from the first close where the long window is
    full up to the end.
    """
    s = np.asarray(series.closes, dtype=float)
    warm = max(protocol.l2_days, protocol.tau_days)
    if s.size < warm + 2:
        raise SeriesTooShortError(f"need at least {warm + 2} closes, got {s.size}")
    delta = 1.0 / TRADING_DAYS
    r = s[1:] / s[:-1] - 1.0
    sd = float(np.std(r, ddof=1))
    sigma_s = sd * math.sqrt(TRADING_DAYS)
    if sd == 0:
        raise UndefinedSharpeError("price series has zero return dispersion")

    ema = ema_run(r / delta, protocol.tau_days * delta, delta)
    weights = np.zeros_like(ema)
    weights[1:] = protocol.m * ema[:-1] / sigma_s**2

    c = CrossMaConfig(protocol.gamma, protocol.alpha, protocol.l1_days * delta, protocol.l2_days * delta)
    theta, start = crossma_allocations(s, c, delta)
    start = max(start, protocol.tau_days - 1)
    theta = theta[start - (protocol.l2_days - 1) :]

    ret_opt = weights[start:] * r[start:]
    ret_cma = theta * r[start:]
    return BacktestReport(
        instrument=series.name,
        sharpe_optimal=_sharpe_or_none(ret_opt),
        sharpe_crossma=_sharpe_or_none(ret_cma),
        n_days=int(ret_opt.size),
        sigma_s=sigma_s,
        config=protocol,
        returns_optimal=ret_opt,
        returns_crossma=ret_cma,
    )
