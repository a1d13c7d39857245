"""Strategy-dependent equity forwards.

The forward grows at the hedge rate between dividend dates and drops by the
net (after-tax) dividend at each ex-date::

    F(T) = S / P(T; z) - sum_{t_k < T} P(t_k; z) / P(T; z) * (1 - rho) * Q_k
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .curves import CurveSet, YieldCurve
from .errors import DomainError, NegativeForwardWarning
from .market import (
    DividendSchedule,
    HedgeSpec,
    MarketSnapshot,
    effective_dividend_tax,
    effective_hedge_curve,
)


@dataclass(frozen=True)
class ForwardCurve:
    """Forward prices implied by a spot, a hedge growth curve and a net tax."""

    spot: float
    hedge_curve: YieldCurve
    net_tax: float
    dividends: DividendSchedule

    @classmethod
    def build(cls, market: MarketSnapshot, hedge: HedgeSpec, curves: CurveSet) -> "ForwardCurve":
        return cls(
            spot=market.spot,
            hedge_curve=effective_hedge_curve(hedge, curves),
            net_tax=effective_dividend_tax(hedge, market.taxes),
            dividends=market.dividends,
        )

    @property
    def dividend_times(self) -> np.ndarray:
        return np.asarray(self.dividends.times, dtype=float)

    @property
    def net_amounts(self) -> np.ndarray:
        return (1.0 - self.net_tax) * np.asarray(self.dividends.amounts, dtype=float)

    def __call__(self, T, warn: bool = True):
        T = np.asarray(T, dtype=float)
        if np.any(T < 0.0):
            raise DomainError("forward maturity must be >= 0")
        pv_divs = np.zeros_like(T)
        if len(self.dividends):
            tk = self.dividend_times
            pv = self.hedge_curve.discount(tk) * self.net_amounts
            # strict cutoff: a dividend paid at T is not yet deducted
            mask = tk[None, :] < T.reshape(-1, 1)
            pv_divs = (mask * pv[None, :]).sum(axis=1).reshape(T.shape)
        fwd = (self.spot - pv_divs) / self.hedge_curve.discount(T)
        if warn and np.any(fwd <= 0.0):
            warnings.warn(
                "dividends exceed the grown spot; forward is not positive",
                NegativeForwardWarning,
                stacklevel=2,
            )
        return float(fwd) if fwd.ndim == 0 else fwd

    def forward_from(self, t: float, T: float) -> tuple[float, float]:
        """Coefficients (a, b) of the forward seen at ``t``: F_t(T) = a * S_t - b.

        Dividends paid in ``[t, T)`` are deducted; ``S_t`` is the cum-dividend
        spot at ``t``.
        """
        P = self.hedge_curve.discount
        a = float(P(t) / P(T))
        b = 0.0
        for tk, qk in zip(self.dividend_times, self.net_amounts):
            if t <= tk < T:
                b += float(P(tk) / P(T)) * qk
        return a, b


def forward_price(market: MarketSnapshot, hedge: HedgeSpec, curves: CurveSet, T):
    """Forward price of the stock for maturity ``T`` under the given hedge."""
    return ForwardCurve.build(market, hedge, curves)(T)
