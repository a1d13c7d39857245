"""First-order par spread approximation around the OIS curve.

All rates are written as one-period spreads over the OIS rate E of each
period.  Keeping only terms linear in the spreads, the dividend taxes and the
Tobin rate, the par spread becomes an OIS-annuity weighted average of the
hedge carry over Libor plus a dividend-tax term driven by the impact rate
``gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blackmodel import (
    OptionKind,
    PerformanceOption,
    inverse_spot,
    performance_option_price,
    terminal_ratio,
)
from .curves import CurveSet, YieldCurve, combine, simple_period_rate
from .errors import UnsupportedConfiguration
from .forwards import ForwardCurve
from .market import HedgeSpec, MarketSnapshot, Strategy, TaxRegime
from .trs import Direction, NotionalMode, TRSContract, check_pairing


@dataclass(frozen=True)
class SpreadDecomposition:
    """One-period rates over OIS on a schedule.

    ``delta_M`` is the repo spread: the one-period rate of ``ois + repo_fee``
    less the OIS rate, so that it reduces to the repo fee at first order.
    """

    dates: tuple[float, ...]
    ois: np.ndarray
    delta_R: np.ndarray
    delta_C: np.ndarray
    delta_M: np.ndarray
    delta_L: np.ndarray

    def period_of(self, T_i: float) -> int:
        """Zero-based index of the period ending at ``T_i``."""
        idx = np.nonzero(np.asarray(self.dates) == T_i)[0]
        if not idx.size or idx[0] == 0:
            raise KeyError(f"{T_i} is not a period end of the schedule")
        return int(idx[0]) - 1


def decompose(curves: CurveSet, dates) -> SpreadDecomposition:
    d = np.asarray(dates, dtype=float)
    start, end = d[:-1], d[1:]

    def one_period(curve: YieldCurve) -> np.ndarray:
        return np.atleast_1d(simple_period_rate(curve, start, end))

    E = one_period(curves.ois)
    repo_rate = combine([(1.0, curves.ois), (1.0, curves.repo_fee)])
    return SpreadDecomposition(
        dates=tuple(float(t) for t in d),
        ois=E,
        delta_R=one_period(curves.funding) - E,
        delta_C=one_period(curves.collateral) - E,
        delta_M=one_period(repo_rate) - E,
        delta_L=one_period(curves.libor_projection) - E,
    )


def gamma(strategy, t_k: float, T_i: float, decomposition: SpreadDecomposition,
          alpha: float, beta: float, taxes: TaxRegime, w: float | None = None) -> float:
    """Dividend tax impact rate of a dividend paid at ``t_k`` in the period ending ``T_i``.

    Stock borrowing shares the stock-lending funding structure.  A blended
    hedge mixes the two impact rates with weight ``w``.
    """
    strategy = Strategy(strategy)
    if t_k > T_i:
        raise ValueError("dividend must be paid before the period end")
    j = decomposition.period_of(T_i)
    dR = decomposition.delta_R[j]
    dC = decomposition.delta_C[j]
    dM = decomposition.delta_M[j]
    gap = T_i - t_k
    bh = taxes.rho_I - taxes.rho_T - (1.0 + beta) * (dR - dC) * gap
    sl = taxes.rho_B - taxes.rho_T - ((beta - alpha) * (dR - dC) - dM) * gap
    if strategy is Strategy.BUY_AND_HOLD:
        return float(bh)
    if strategy is Strategy.BLENDED:
        if w is None:
            raise ValueError("blended strategy needs w")
        return float(w * sl + (1.0 - w) * bh)
    return float(sl)


def carry_spread(hedge: HedgeSpec, decomposition: SpreadDecomposition) -> np.ndarray:
    """First-order hedge carry over Libor, one value per period."""
    d = decomposition
    bh = d.delta_R - d.delta_L
    sl = -hedge.alpha * d.delta_R + (1.0 + hedge.alpha) * d.delta_C - d.delta_L - d.delta_M
    w = hedge.weight
    return w * sl + (1.0 - w) * bh


@dataclass(frozen=True)
class ApproxSpread:
    rate_term: float
    dividend_term: float
    tobin_term: float
    annuity: float

    @property
    def spread(self) -> float:
        return (self.rate_term + self.dividend_term + self.tobin_term) / self.annuity


def approx_par_spread(hedge: HedgeSpec, contract: TRSContract, market: MarketSnapshot,
                      curves: CurveSet,
                      decomposition: SpreadDecomposition | None = None) -> ApproxSpread:
    """First-order par spread for aligned schedules.

    Discounting, forwards and the Tobin block are evaluated at OIS level
    (gross dividends, no tax); every neglected piece multiplies two small
    quantities.  Option values in the Tobin block follow the contract's
    expectation mode.
    """
    check_pairing(contract, hedge)
    if not contract.aligned:
        raise UnsupportedConfiguration("the spread expansion needs aligned schedules")
    dec = decomposition or decompose(curves, contract.equity_dates)
    T = np.asarray(contract.equity_dates)
    if tuple(dec.dates) != tuple(T):
        raise ValueError("decomposition schedule differs from the contract schedule")
    x = np.diff(T)
    e = curves.ois
    Pe = e.discount(T)
    mode = contract.expectation_mode
    vol = market.vol
    taxes = market.taxes
    tau = taxes.tau if contract.tobin_enabled else 0.0
    ois_fwd = ForwardCurve(market.spot, e, 0.0, market.dividends)
    S0 = market.spot
    resetting = contract.notional_mode is NotionalMode.RESETTING
    n = len(x)

    # zeroth-order notional factor F(T_{i-1}) / S0 of a resetting contract
    notional = ois_fwd(T[:-1], warn=False) / S0 * Pe[:-1] if resetting else np.ones(n)
    carry = carry_spread(hedge, dec)
    rate_term = math.fsum(x * Pe[1:] * carry * notional)
    annuity = math.fsum(x * Pe[1:] * notional)

    div_terms = []
    for tk, Qk in zip(market.dividends.times, market.dividends.amounts):
        if tk >= T[-1]:
            continue
        i = int(np.searchsorted(T, tk, side="right"))
        if resetting:
            per_spot = Qk / S0
        else:
            per_spot = Qk * inverse_spot(ois_fwd, vol, T[i - 1], mode)
        g = gamma(hedge.strategy, tk, T[i], dec, hedge.alpha, contract.beta, taxes, hedge.w)
        div_terms.append(float(e.discount(tk)) * per_spot * g)

    tobin = 0.0
    if tau:
        payer = contract.direction is Direction.PAYER
        if resetting:
            cost = 1.0 if payer else Pe[n] * ois_fwd(T[n], warn=False) / S0
        else:
            kind = OptionKind.PUT if payer else OptionKind.CALL
            opts = math.fsum(
                performance_option_price(PerformanceOption(T[i - 1], T[i], kind, Pe[i]),
                                         e, vol, mode)
                for i in range(1, n)
            )
            if payer:
                cost = 1.0 + opts
            else:
                cost = opts + Pe[n] * terminal_ratio(ois_fwd, vol, T[n - 1], T[n], mode)
        tobin = tau * cost if payer else -tau * cost

    return ApproxSpread(
        rate_term=float(rate_term),
        dividend_term=math.fsum(div_terms),
        tobin_term=float(tobin),
        annuity=float(annuity),
    )


def scale_spreads(curves: CurveSet, taxes: TaxRegime, eps: float) -> tuple[CurveSet, TaxRegime]:
    """Shrink every spread over OIS, the dividend taxes and the Tobin rate by ``eps``."""
    e = curves.ois

    def shrink(curve: YieldCurve) -> YieldCurve:
        return combine([(eps, curve), (1.0 - eps, e)])

    scaled = CurveSet(
        funding=shrink(curves.funding),
        collateral=shrink(curves.collateral),
        ois=e,
        repo_fee=curves.repo_fee.scaled(eps),
        libor_projection=shrink(curves.libor_projection),
    )
    return scaled, taxes.scaled(eps)
