"""Black-dynamics expectations entering the TRS spread.

Two families of quantities are needed: forward-starting ATM options on the
one-period performance ``S(T_i) / S(T_{i-1})`` (Tobin tax on rebalancing) and
expectations of ``1 / S`` (dividends expressed per unit of notional).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy.special import ndtr

from .curves import CurveSet, YieldCurve
from .errors import DomainError
from .forwards import ForwardCurve
from .market import HedgeSpec, MarketSnapshot


class ExpectationMode(str, Enum):
    """How expectations over the stock are evaluated.

    ``BLACK`` uses lognormal dynamics with the market volatility;
    ``FORWARD_INTRINSIC`` replaces spots by forwards and options by their
    intrinsic value.
    """

    BLACK = "black"
    FORWARD_INTRINSIC = "forward_intrinsic"


class OptionKind(str, Enum):
    CALL = "call"
    PUT = "put"


def black(forward: float, strike: float, variance: float, kind: OptionKind) -> float:
    """Undiscounted Black price for total variance ``vol**2 * T``."""
    kind = OptionKind(kind)
    if variance < 0.0:
        raise DomainError("total variance must be >= 0")
    if variance == 0.0 or forward <= 0.0:
        intrinsic = forward - strike if kind is OptionKind.CALL else strike - forward
        return max(intrinsic, 0.0)
    sd = math.sqrt(variance)
    d1 = (math.log(forward / strike) + 0.5 * variance) / sd
    d2 = d1 - sd
    if kind is OptionKind.CALL:
        return float(forward * ndtr(d1) - strike * ndtr(d2))
    return float(strike * ndtr(-d2) - forward * ndtr(-d1))


@dataclass(frozen=True)
class PerformanceOption:
    """ATM option on S(payment)/S(fixing), paid at ``payment``.

    ``discount`` is the discount factor to the payment date on the TRS
    discount curve.
    """

    fixing: float
    payment: float
    kind: OptionKind
    discount: float

    def __post_init__(self):
        if not self.fixing < self.payment:
            raise ValueError("performance option needs fixing < payment")
        object.__setattr__(self, "kind", OptionKind(self.kind))


def performance_ratio_forward(hedge_curve: YieldCurve, fixing: float, payment: float) -> float:
    """Forward of S(payment)/S(fixing) ignoring dividends inside the window."""
    return float(hedge_curve.discount(fixing) / hedge_curve.discount(payment))


def performance_option_price(
    opt: PerformanceOption,
    hedge_curve: YieldCurve,
    vol: float,
    mode: ExpectationMode = ExpectationMode.BLACK,
) -> float:
    if vol < 0.0:
        raise DomainError("vol must be >= 0")
    fwd = performance_ratio_forward(hedge_curve, opt.fixing, opt.payment)
    var = 0.0
    if ExpectationMode(mode) is ExpectationMode.BLACK:
        var = vol * vol * (opt.payment - opt.fixing)
    return opt.discount * black(fwd, 1.0, var, opt.kind)


def inverse_spot(fwd: ForwardCurve, vol: float, T: float, mode=ExpectationMode.BLACK) -> float:
    """E[1/S_T] for a lognormal S_T with mean ``fwd(T)``: exp(vol^2 T) / F(T)."""
    if T < 0.0:
        raise DomainError("T must be >= 0")
    if T == 0.0:
        return 1.0 / fwd.spot
    F = fwd(T, warn=False)
    if F <= 0.0:
        raise DomainError(f"forward at T={T} is not positive ({F}); dividends inconsistent")
    if ExpectationMode(mode) is ExpectationMode.BLACK:
        return math.exp(vol * vol * T) / F
    return 1.0 / F


def expected_inverse_spot(
    market: MarketSnapshot,
    hedge: HedgeSpec,
    curves: CurveSet,
    T: float,
    mode: ExpectationMode = ExpectationMode.BLACK,
) -> float:
    return inverse_spot(ForwardCurve.build(market, hedge, curves), market.vol, T, mode)


def expected_dividend_over_spot(
    market: MarketSnapshot,
    hedge: HedgeSpec,
    curves: CurveSet,
    fixing: float,
    k: int,
    mode: ExpectationMode = ExpectationMode.BLACK,
) -> float:
    """E[Q_k / S(fixing)] with the dividend known today."""
    amount = market.dividends.amounts[k]
    return amount * expected_inverse_spot(market, hedge, curves, fixing, mode)


def terminal_ratio(fwd: ForwardCurve, vol: float, fixing: float, payment: float,
                   mode=ExpectationMode.BLACK) -> float:
    """E[F_{fixing}(payment) / S_{fixing}], dividends in [fixing, payment) included."""
    a, b = fwd.forward_from(fixing, payment)
    if b == 0.0:
        return a
    return a - b * inverse_spot(fwd, vol, fixing, mode)


def expected_terminal_ratio(
    market: MarketSnapshot,
    hedge: HedgeSpec,
    curves: CurveSet,
    fixing: float,
    payment: float,
    mode: ExpectationMode = ExpectationMode.BLACK,
) -> float:
    fwd = ForwardCurve.build(market, hedge, curves)
    return terminal_ratio(fwd, market.vol, fixing, payment, mode)
