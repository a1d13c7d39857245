"""Equity market data, tax regime and hedge strategy selection."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

import numpy as np

from .curves import CurveSet, YieldCurve, blended_repo_curve, combine


@dataclass(frozen=True)
class DividendSchedule:
    """Deterministic gross cash dividends, amounts in contract currency per share."""

    times: tuple[float, ...] = ()
    amounts: tuple[float, ...] = ()

    def __post_init__(self):
        t = tuple(float(v) for v in self.times)
        q = tuple(float(v) for v in self.amounts)
        if len(t) != len(q):
            raise ValueError("dividend times and amounts differ in length")
        if any(v <= 0.0 for v in t):
            raise ValueError("dividend times must be > 0")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("dividend times must be strictly increasing")
        if any(v < 0.0 for v in q):
            raise ValueError("dividend amounts must be >= 0")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "amounts", q)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "DividendSchedule":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __len__(self):
        return len(self.times)

    def scaled(self, factor: float) -> "DividendSchedule":
        return DividendSchedule(self.times, tuple(q * factor for q in self.amounts))

    def before(self, T: float) -> "DividendSchedule":
        """Dividends paid strictly before ``T``."""
        keep = [(t, q) for t, q in zip(self.times, self.amounts) if t < T]
        return DividendSchedule.from_pairs(keep)


@dataclass(frozen=True)
class TaxRegime:
    """Dividend taxes and Tobin tax.

    rho_I: withholding suffered by an investor holding the stock.
    rho_B: fraction of the dividend a stock borrower does not pass back.
    rho_T: fraction of the dividend not passed through by the TRS.
    tau: Tobin tax rate per share purchase, as a fraction of market value.
    """

    rho_I: float = 0.0
    rho_B: float = 0.0
    rho_T: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        for name in ("rho_I", "rho_B", "rho_T", "tau"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if self.tau > 0.01:
            warnings.warn(f"Tobin rate tau={self.tau} is above 1%", stacklevel=2)

    def scaled(self, factor: float) -> "TaxRegime":
        return TaxRegime(
            self.rho_I * factor, self.rho_B * factor, self.rho_T * factor, self.tau * factor
        )


@dataclass(frozen=True)
class MarketSnapshot:
    spot: float
    vol: float
    dividends: DividendSchedule = field(default_factory=DividendSchedule)
    taxes: TaxRegime = field(default_factory=TaxRegime)

    def __post_init__(self):
        if not self.spot > 0.0:
            raise ValueError("spot must be positive")
        if not self.vol >= 0.0:
            raise ValueError("vol must be non-negative")

    def replace(self, **changes) -> "MarketSnapshot":
        return replace(self, **changes)


class Strategy(str, Enum):
    BUY_AND_HOLD = "buy_and_hold"
    STOCK_LENDING = "stock_lending"
    STOCK_BORROWING = "stock_borrowing"
    BLENDED = "blended"


@dataclass(frozen=True)
class HedgeSpec:
    """Hedging strategy and repo haircut.

    ``w`` is only meaningful for ``Strategy.BLENDED``: the weight of stock
    lending against buy-and-hold.
    """

    strategy: Strategy
    alpha: float = 0.0
    w: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.alpha < 0.0:
            raise ValueError("repo haircut alpha must be >= 0")
        if self.strategy is Strategy.BLENDED:
            if self.w is None or not 0.0 <= self.w <= 1.0:
                raise ValueError("blended hedge needs a weight w in [0, 1]")
        elif self.w is not None:
            raise ValueError("w is only allowed with the blended strategy")

    @classmethod
    def buy_and_hold(cls) -> "HedgeSpec":
        return cls(Strategy.BUY_AND_HOLD)

    @classmethod
    def stock_lending(cls, alpha: float = 0.0) -> "HedgeSpec":
        return cls(Strategy.STOCK_LENDING, alpha)

    @classmethod
    def stock_borrowing(cls, alpha: float = 0.0) -> "HedgeSpec":
        return cls(Strategy.STOCK_BORROWING, alpha)

    @classmethod
    def blended(cls, w: float, alpha: float = 0.0) -> "HedgeSpec":
        return cls(Strategy.BLENDED, alpha, w)

    @property
    def weight(self) -> float:
        """Weight of the repo (lending/borrowing) leg in the hedge."""
        if self.strategy is Strategy.BUY_AND_HOLD:
            return 0.0
        if self.strategy is Strategy.BLENDED:
            return float(self.w)
        return 1.0


def effective_dividend_tax(hedge: HedgeSpec, taxes: TaxRegime) -> float:
    """Net dividend tax suffered by the hedge: rho_I for BH, rho_B for repo legs."""
    w = hedge.weight
    if w == 0.0:
        return taxes.rho_I
    if w == 1.0:
        return taxes.rho_B
    return w * taxes.rho_B + (1.0 - w) * taxes.rho_I


def effective_hedge_curve(hedge: HedgeSpec, curves: CurveSet) -> YieldCurve:
    """Growth rate of the hedged stock: r for BH, the repo blend z otherwise."""
    w = hedge.weight
    if w == 0.0:
        return curves.funding
    repo = blended_repo_curve(curves, hedge.alpha)
    if w == 1.0:
        return repo
    return combine([(w, repo), (1.0 - w, curves.funding)])


def net_dividends(market: MarketSnapshot, hedge: HedgeSpec) -> np.ndarray:
    """Dividend amounts after the hedge's dividend tax."""
    rho = effective_dividend_tax(hedge, market.taxes)
    return (1.0 - rho) * np.asarray(market.dividends.amounts, dtype=float)
