"""Equity total return swaps: analytic value and par spreads.

Values are expressed per unit of initial notional.  The valuing party is the
bank holding the TRS in the stated direction together with its hedge, so
Tobin tax on the hedge trades is always a cost.  Receiver contracts are hedged
by stock borrowing, payer contracts by buy-and-hold, stock lending or a blend
of the two.

Two notional conventions are supported:

* constant notional: the equity leg pays the one-period return
  ``S(T_i)/S(T_{i-1}) - 1`` and the hedge is rebalanced every period;
* resetting notional: a fixed quantity ``1/S_0`` of shares, the floating leg
  accrues on the notional reset to ``S(T_{i-1})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .blackmodel import (
    ExpectationMode,
    OptionKind,
    PerformanceOption,
    inverse_spot,
    performance_option_price,
    terminal_ratio,
)
from .curves import CurveSet, simple_period_rate, trs_discount_curve
from .errors import UnsupportedConfiguration
from .forwards import ForwardCurve
from .market import (
    HedgeSpec,
    MarketSnapshot,
    Strategy,
    effective_dividend_tax,
    effective_hedge_curve,
)


class Direction(str, Enum):
    RECEIVER = "receiver"
    PAYER = "payer"


class NotionalMode(str, Enum):
    CONSTANT = "constant"
    RESETTING = "resetting"


def schedule(maturity: float, periods: int) -> tuple[float, ...]:
    """Regular schedule ``0, maturity/periods, ..., maturity``."""
    if periods < 1 or maturity <= 0:
        raise ValueError("schedule needs periods >= 1 and maturity > 0")
    return tuple(i * maturity / periods for i in range(periods + 1))


@dataclass(frozen=True)
class TRSContract:
    direction: Direction
    notional_mode: NotionalMode
    equity_dates: tuple[float, ...]
    funding_dates: tuple[float, ...]
    spread: float | None = None
    beta: float = 0.0
    tobin_enabled: bool = True
    expectation_mode: ExpectationMode = ExpectationMode.BLACK

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "notional_mode", NotionalMode(self.notional_mode))
        object.__setattr__(self, "expectation_mode", ExpectationMode(self.expectation_mode))
        for name in ("equity_dates", "funding_dates"):
            dates = tuple(float(t) for t in getattr(self, name))
            if len(dates) < 2 or dates[0] != 0.0:
                raise ValueError(f"{name} must start at 0 and hold at least one period")
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, dates)
        if self.equity_dates[-1] != self.funding_dates[-1]:
            raise ValueError("equity and funding schedules must share the maturity")
        if self.beta < 0.0:
            raise ValueError("TRS haircut beta must be >= 0")

    @classmethod
    def regular(cls, direction, notional_mode, maturity: float = 1.0, periods: int = 12,
                funding_periods: int | None = None, **kwargs) -> "TRSContract":
        eq = schedule(maturity, periods)
        fu = schedule(maturity, funding_periods or periods)
        return cls(direction, notional_mode, eq, fu, **kwargs)

    @property
    def maturity(self) -> float:
        return self.equity_dates[-1]

    @property
    def aligned(self) -> bool:
        return self.equity_dates == self.funding_dates

    def with_spread(self, spread: float) -> "TRSContract":
        return replace(self, spread=spread)


def eta(T: float, equity_dates: Sequence[float]) -> float:
    """Last equity date strictly before ``T``."""
    dates = np.asarray(equity_dates, dtype=float)
    i = int(np.searchsorted(dates, T, side="left")) - 1
    return float(dates[max(i, 0)])


def check_pairing(contract: TRSContract, hedge: HedgeSpec) -> None:
    if contract.direction is Direction.RECEIVER:
        if hedge.strategy is not Strategy.STOCK_BORROWING:
            raise UnsupportedConfiguration(
                "an equity-receiver TRS is hedged by stock borrowing, got "
                f"{hedge.strategy.value}"
            )
    elif hedge.strategy is Strategy.STOCK_BORROWING:
        raise UnsupportedConfiguration(
            "an equity-payer TRS is hedged by buy-and-hold, stock lending or a blend"
        )


@dataclass(frozen=True)
class SpreadBreakdown:
    """Numerator pieces and denominator of the par spread."""

    rate_leg: float
    dividend_tax_cost: float
    tobin_cost: float
    annuity: float

    def __post_init__(self):
        for name in ("rate_leg", "dividend_tax_cost", "tobin_cost", "annuity"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def spread(self) -> float:
        return (self.rate_leg + self.dividend_tax_cost + self.tobin_cost) / self.annuity


@dataclass(frozen=True)
class LegValues:
    """Present values of the contract legs, from the valuing party's side."""

    performance: float
    dividends: float
    funding: float
    tobin: float

    def __post_init__(self):
        for name in ("performance", "dividends", "funding", "tobin"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def total(self) -> float:
        return self.performance + self.dividends + self.funding + self.tobin


class _Setup:
    """Curves, schedules and dividend data shared by the pricing routines."""

    def __init__(self, contract: TRSContract, market: MarketSnapshot, curves: CurveSet,
                 hedge: HedgeSpec):
        check_pairing(contract, hedge)
        self.contract = contract
        self.market = market
        self.mode = contract.expectation_mode
        self.vol = market.vol
        self.z = effective_hedge_curve(hedge, curves)
        self.y = trs_discount_curve(curves, contract.beta)
        self.rho = effective_dividend_tax(hedge, market.taxes)
        self.rho_T = market.taxes.rho_T
        self.tau = market.taxes.tau if contract.tobin_enabled else 0.0
        self.fwd = ForwardCurve(market.spot, self.z, self.rho, market.dividends)
        self.S0 = market.spot

        self.T = np.asarray(contract.equity_dates)
        self.x = np.diff(self.T)
        self.Tp = np.asarray(contract.funding_dates)
        self.xp = np.diff(self.Tp)
        self.n = len(self.x)
        self.Z = np.atleast_1d(simple_period_rate(self.z, self.T[:-1], self.T[1:]))
        self.L = np.atleast_1d(
            simple_period_rate(curves.libor_projection, self.Tp[:-1], self.Tp[1:])
        )
        self.PyT = self.y.discount(self.T)
        self.PzT = self.z.discount(self.T)
        self.PyTp = self.y.discount(self.Tp)

        tk = np.asarray(market.dividends.times, dtype=float)
        Qk = np.asarray(market.dividends.amounts, dtype=float)
        live = tk < self.T[-1]
        self.tk = tk[live]
        self.Qk = Qk[live]
        self.qk = (1.0 - self.rho) * self.Qk
        # period i holds the dividends with T_{i-1} <= t_k < T_i
        self.period = np.searchsorted(self.T, self.tk, side="right")

        self.eta_p = np.array([eta(t, self.T) for t in self.Tp[1:]])

    def Py(self, t):
        return self.y.discount(t)

    def Pz(self, t):
        return self.z.discount(t)

    def inv_spot(self, t: float) -> float:
        return inverse_spot(self.fwd, self.vol, t, self.mode)

    def option(self, i: int, kind: OptionKind) -> float:
        opt = PerformanceOption(self.T[i - 1], self.T[i], kind, self.PyT[i])
        return performance_option_price(opt, self.z, self.vol, self.mode)

    def sign(self) -> float:
        return 1.0 if self.contract.direction is Direction.RECEIVER else -1.0


def _tobin_cost_constant(s: _Setup) -> float:
    """PV of the Tobin tax paid on the hedge of a constant-notional TRS."""
    if s.tau == 0.0:
        return 0.0
    n = s.n
    if s.contract.direction is Direction.RECEIVER:
        # short hedge: shares are bought back when the stock falls, and at maturity
        calls = math.fsum(s.option(i, OptionKind.CALL) for i in range(1, n))
        last = s.PyT[n] * terminal_ratio(s.fwd, s.vol, s.T[n - 1], s.T[n], s.mode)
        return s.tau * (calls + last)
    puts = math.fsum(s.option(i, OptionKind.PUT) for i in range(1, n))
    return s.tau * (1.0 + puts)


def _constant_notional_breakdown(s: _Setup) -> SpreadBreakdown:
    rate_leg = math.fsum(s.x * s.PyT[1:] * s.Z) - math.fsum(s.xp * s.PyTp[1:] * s.L)
    terms = []
    for tk, Qk, i in zip(s.tk, s.Qk, s.period):
        expected = Qk * s.inv_spot(s.T[i - 1])
        growth = (s.PyT[i] / s.PzT[i]) / (s.Py(tk) / s.Pz(tk))
        terms.append(s.Py(tk) * expected * (1.0 - s.rho_T - (1.0 - s.rho) * growth))
    tobin = _tobin_cost_constant(s)
    return SpreadBreakdown(
        rate_leg=rate_leg,
        dividend_tax_cost=math.fsum(terms),
        tobin_cost=-s.sign() * tobin,
        annuity=math.fsum(s.xp * s.PyTp[1:]),
    )


def _constant_notional_legs(s: _Setup, K: float) -> LegValues:
    # performance: E[S_i/S_{i-1}] = growth - (dividends in period) * E[1/S_{i-1}]
    perf = []
    for i in range(1, s.n + 1):
        growth = s.PzT[i - 1] / s.PzT[i]
        in_period = s.period == i
        drop = math.fsum(s.Pz(s.tk[in_period]) / s.PzT[i] * s.qk[in_period])
        perf.append(s.PyT[i] * (growth - 1.0 - drop * s.inv_spot(s.T[i - 1])))
    divs = [
        s.Py(tk) * (1.0 - s.rho_T) * Qk * s.inv_spot(s.T[i - 1])
        for tk, Qk, i in zip(s.tk, s.Qk, s.period)
    ]
    funding = -math.fsum(s.xp * s.PyTp[1:] * (s.L + K))
    sg = s.sign()
    return LegValues(
        performance=sg * math.fsum(perf),
        dividends=sg * math.fsum(divs),
        funding=sg * funding,
        tobin=-_tobin_cost_constant(s),
    )


def _resetting_tobin_cost(s: _Setup, via_forward: bool) -> float:
    if s.tau == 0.0:
        return 0.0
    if s.contract.direction is Direction.PAYER:
        # shares bought once at inception, no rebalancing
        return s.tau
    n = s.n
    if via_forward:
        return s.tau * s.PyT[n] * s.fwd(s.T[n], warn=False) / s.S0
    yz_n = s.PyT[n] / s.PzT[n]
    divs = math.fsum(s.Pz(s.tk) * yz_n * s.qk / s.S0)
    return s.tau * (yz_n - divs)


def _resetting_breakdown(s: _Setup) -> SpreadBreakdown:
    F_eta = s.fwd(s.eta_p, warn=False) / s.S0
    yz_prev = s.PyT[:-1] / s.PzT[:-1]
    fwd_disc = s.PyT[1:] / s.PyT[:-1]
    aligned = s.contract.aligned
    if aligned:
        carry = s.Z - s.L
        rate_leg = math.fsum(s.x * yz_prev * fwd_disc * carry)
        annuity = math.fsum(s.x * s.PyT[1:] * F_eta)
    else:
        carry = s.Z
        rate_leg = (math.fsum(s.x * yz_prev * fwd_disc * s.Z)
                    - math.fsum(s.xp * s.PyTp[1:] * s.L * F_eta))
        annuity = math.fsum(s.xp * s.PyTp[1:] * F_eta)

    terms = []
    for tk, Qk, i in zip(s.tk, s.Qk, s.period):
        growth = (s.PyT[i] / s.PzT[i]) / (s.Py(tk) / s.Pz(tk))
        terms.append(s.Py(tk) * Qk / s.S0 * (1.0 - s.rho_T - (1.0 - s.rho) * growth))
    # dividends paid before a period start lower the notional accruing in it
    for i in range(1, s.n + 1):
        before = s.tk < s.T[i - 1]
        if not np.any(before):
            continue
        lost = math.fsum(s.qk[before] / s.S0 * s.Pz(s.tk[before]) / s.PzT[i - 1])
        terms.append(-s.x[i - 1] * s.PyT[i] * carry[i - 1] * lost)

    tobin = _resetting_tobin_cost(s, via_forward=False)
    return SpreadBreakdown(
        rate_leg=rate_leg,
        dividend_tax_cost=math.fsum(terms),
        tobin_cost=-s.sign() * tobin,
        annuity=annuity,
    )


def _resetting_legs(s: _Setup, K: float) -> LegValues:
    F = s.fwd(s.T, warn=False) / s.S0
    perf = math.fsum(s.PyT[1:] * np.diff(F))
    divs = (1.0 - s.rho_T) * math.fsum(s.Py(s.tk) * s.Qk / s.S0)
    F_eta = s.fwd(s.eta_p, warn=False) / s.S0
    funding = -math.fsum(s.xp * s.PyTp[1:] * (s.L + K) * F_eta)
    sg = s.sign()
    return LegValues(
        performance=sg * perf,
        dividends=sg * divs,
        funding=sg * funding,
        tobin=-_resetting_tobin_cost(s, via_forward=True),
    )


def par_spread_constant_notional(contract: TRSContract, market: MarketSnapshot,
                                 curves: CurveSet, hedge: HedgeSpec):
    """Par spread of a constant-notional TRS and its decomposition."""
    if contract.notional_mode is not NotionalMode.CONSTANT:
        raise ValueError("contract is not constant-notional")
    b = _constant_notional_breakdown(_Setup(contract, market, curves, hedge))
    return b.spread, b


def par_spread_resetting(contract: TRSContract, market: MarketSnapshot,
                         curves: CurveSet, hedge: HedgeSpec):
    """Par spread of a resetting-notional TRS and its decomposition.

    Aligned schedules use the simplified form, where the Libor fixings are
    netted period by period against the hedge carry.
    """
    if contract.notional_mode is not NotionalMode.RESETTING:
        raise ValueError("contract is not resetting-notional")
    b = _resetting_breakdown(_Setup(contract, market, curves, hedge))
    return b.spread, b


def par_spread(contract: TRSContract, market: MarketSnapshot, curves: CurveSet,
               hedge: HedgeSpec):
    if contract.notional_mode is NotionalMode.CONSTANT:
        return par_spread_constant_notional(contract, market, curves, hedge)
    return par_spread_resetting(contract, market, curves, hedge)


def trs_legs(contract: TRSContract, market: MarketSnapshot, curves: CurveSet,
             hedge: HedgeSpec) -> LegValues:
    """Leg-by-leg analytic value at the contract spread."""
    if contract.spread is None:
        raise ValueError("contract spread is not set")
    s = _Setup(contract, market, curves, hedge)
    if contract.notional_mode is NotionalMode.CONSTANT:
        return _constant_notional_legs(s, contract.spread)
    return _resetting_legs(s, contract.spread)


def trs_value(contract: TRSContract, market: MarketSnapshot, curves: CurveSet,
              hedge: HedgeSpec) -> float:
    return trs_legs(contract, market, curves, hedge).total
