import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trs_fva.blackmodel import ExpectationMode
from trs_fva.curves import CurveSet, YieldCurve
from trs_fva.errors import UnsupportedConfiguration
from trs_fva.market import DividendSchedule, HedgeSpec, MarketSnapshot, TaxRegime
from trs_fva.trs import (
    Direction,
    NotionalMode,
    TRSContract,
    eta,
    par_spread,
    par_spread_constant_notional,
    par_spread_resetting,
    schedule,
    trs_legs,
    trs_value,
)

from conftest import flat_curves
from oracles import FlatWorld, par, value

MONTHLY = schedule(1.0, 12)
QUARTERLY = schedule(1.0, 4)


def test_eta_examples():
    assert eta(0.125, MONTHLY) == pytest.approx(1 / 12)
    assert eta(1 / 12, MONTHLY) == 0.0
    assert eta(1.0, MONTHLY) == pytest.approx(11 / 12)


@pytest.mark.parametrize("dates", [(0.0,), (0.1, 1.0), (0.0, 0.5, 0.5, 1.0)])
def test_bad_schedules(dates):
    with pytest.raises(ValueError):
        TRSContract("payer", "constant", dates, dates)


def test_schedules_must_share_maturity():
    with pytest.raises(ValueError):
        TRSContract("payer", "constant", MONTHLY, schedule(2.0, 24))


@pytest.mark.parametrize("direction,hedge", [
    ("receiver", HedgeSpec.buy_and_hold()),
    ("receiver", HedgeSpec.stock_lending(0.05)),
    ("receiver", HedgeSpec.blended(0.5)),
    ("payer", HedgeSpec.stock_borrowing(0.05)),
])
def test_unsupported_pairings(direction, hedge):
    c = TRSContract.regular(direction, "constant")
    with pytest.raises(UnsupportedConfiguration):
        par_spread(c, MarketSnapshot(73.0, 0.2), flat_curves(), hedge)


def test_mode_specific_solvers_check_mode():
    m, cv, h = MarketSnapshot(73.0, 0.2), flat_curves(), HedgeSpec.buy_and_hold()
    with pytest.raises(ValueError):
        par_spread_constant_notional(TRSContract.regular("payer", "resetting"), m, cv, h)
    with pytest.raises(ValueError):
        par_spread_resetting(TRSContract.regular("payer", "constant"), m, cv, h)


def test_value_needs_spread():
    with pytest.raises(ValueError):
        trs_value(TRSContract.regular("payer", "constant"), MarketSnapshot(73.0, 0.2),
                  flat_curves(), HedgeSpec.buy_and_hold())


# ---------------------------------------------------------------- trivial cases

@pytest.mark.parametrize("mode", ["constant", "resetting"])
@pytest.mark.parametrize("direction,hedge", [("payer", HedgeSpec.buy_and_hold()),
                                             ("receiver", HedgeSpec.stock_borrowing(0.0))])
def test_zero_spread_when_carry_matches_libor(mode, direction, hedge):
    curves = flat_curves(r=0.013, c=0.013, e=0.01, libor=0.013)
    c = TRSContract.regular(direction, mode, tobin_enabled=False)
    K, _ = par_spread(c, MarketSnapshot(73.0, 0.3), curves, hedge)
    assert K == pytest.approx(0.0, abs=1e-15)


def test_ten_bp_carry_gives_ten_bp():
    libor = 0.012
    # choose r so that the monthly simple rate of r is exactly 10bp above Libor's
    Z = 12 * math.expm1(libor / 12) + 0.001
    r = 12 * math.log1p(Z / 12)
    curves = flat_curves(r=r, c=0.004, libor=libor)
    c = TRSContract.regular("payer", "constant", tobin_enabled=False)
    K, _ = par_spread(c, MarketSnapshot(73.0, 0.2), curves, HedgeSpec.buy_and_hold())
    # direct summation: sum x P (Z - L) / sum x P with a flat simple-rate gap
    x = 1 / 12
    num = sum(x * math.exp(-0.004 * i * x) * 0.001 for i in range(1, 13))
    den = sum(x * math.exp(-0.004 * i * x) for i in range(1, 13))
    assert K == pytest.approx(num / den, abs=1e-15)
    assert K == pytest.approx(0.001, abs=1e-6)


def test_resetting_matches_constant_for_flat_curves():
    """Without dividends and Tobin tax both conventions coincide for flat curves."""
    curves = flat_curves(r=0.02, c=0.005, libor=0.011)
    m = MarketSnapshot(73.0, 0.25)
    for direction, hedge in [("payer", HedgeSpec.buy_and_hold()),
                             ("payer", HedgeSpec.stock_lending(0.05)),
                             ("receiver", HedgeSpec.stock_borrowing(0.05))]:
        kc, _ = par_spread(TRSContract.regular(direction, "constant", tobin_enabled=False), m, curves, hedge)
        kr, _ = par_spread(TRSContract.regular(direction, "resetting", tobin_enabled=False), m, curves, hedge)
        assert kr == pytest.approx(kc, abs=1e-15)


def test_resetting_differs_from_constant_for_sloped_curves():
    """With a sloped hedge-minus-Libor carry the gap is second order in rates."""
    z = YieldCurve.from_pillars([(0.0, 0.01), (0.5, 0.03)])
    curves = CurveSet(z, YieldCurve.flat(0.005), YieldCurve.flat(0.0), YieldCurve.flat(0.0),
                      YieldCurve.flat(0.011))
    m = MarketSnapshot(73.0, 0.25)
    h = HedgeSpec.buy_and_hold()
    kc, _ = par_spread(TRSContract.regular("payer", "constant", tobin_enabled=False), m, curves, h)
    kr, _ = par_spread(TRSContract.regular("payer", "resetting", tobin_enabled=False), m, curves, h)
    assert kr != kc
    assert abs(kr - kc) < 0.02 * 0.01  # (rate spread) x (rate level)


# ------------------------------------------------------- deterministic oracle

def world(**kw):
    base = dict(r=0.012, c=0.004, fee=0.003, libor=0.006, alpha=0.05, beta=0.0, w=0.0,
                rho_I=0.15, rho_B=0.05, rho_T=0.02, tau=0.0, spot=73.0, dividends=[])
    base.update(kw)
    return FlatWorld(**base)


def package_inputs(wd: FlatWorld, receiver: bool):
    curves = flat_curves(r=wd.r, c=wd.c, fee=wd.fee, libor=wd.libor)
    market = MarketSnapshot(wd.spot, 0.0, DividendSchedule.from_pairs(wd.dividends),
                            TaxRegime(wd.rho_I, wd.rho_B, wd.rho_T, wd.tau))
    if receiver:
        hedge = HedgeSpec.stock_borrowing(wd.alpha)
    elif wd.w in (0.0, 1.0):
        hedge = HedgeSpec.buy_and_hold() if wd.w == 0.0 else HedgeSpec.stock_lending(wd.alpha)
    else:
        hedge = HedgeSpec.blended(wd.w, wd.alpha)
    return curves, market, hedge


CASES = {
    # dividends anywhere, including on a coupon date and after maturity; no Tobin tax
    "dividends": dict(dividends=[(0.05, 3.2), (0.25, 1.0), (0.6, 0.8), (1.3, 2.0)]),
    # Tobin tax without dividends
    "tobin": dict(tau=0.001),
    # haircut on the TRS collateral
    "beta": dict(beta=0.1, dividends=[(0.4, 1.5)]),
}


@pytest.mark.parametrize("case", sorted(CASES))
@pytest.mark.parametrize("receiver,w", [(True, 1.0), (False, 0.0), (False, 1.0), (False, 0.35)])
@pytest.mark.parametrize("constant", [True, False])
@pytest.mark.parametrize("equity,funding", [(MONTHLY, MONTHLY), (QUARTERLY, MONTHLY)])
def test_par_spread_matches_cash_flow_oracle(case, receiver, w, constant, equity, funding):
    wd = world(w=w, **CASES[case])
    curves, market, hedge = package_inputs(wd, receiver)
    c = TRSContract("receiver" if receiver else "payer", "constant" if constant else "resetting",
                    equity, funding, beta=wd.beta)
    K, b = par_spread(c, market, curves, hedge)
    assert K == pytest.approx(par(wd, receiver, constant, list(equity), list(funding)), abs=1e-12)
    assert trs_value(c.with_spread(0.004), market, curves, hedge) == pytest.approx(
        value(wd, receiver, constant, list(equity), list(funding), 0.004), abs=1e-12)


def test_receiver_terminal_tobin_includes_last_period_dividend():
    wd = world(w=1.0, tau=0.002, dividends=[(0.95, 2.0)])
    curves, market, hedge = package_inputs(wd, True)
    c = TRSContract.regular("receiver", "constant")
    K, _ = par_spread(c, market, curves, hedge)
    assert K == pytest.approx(par(wd, True, True, list(MONTHLY), list(MONTHLY)), abs=1e-12)


def test_dividend_on_coupon_date_belongs_to_later_period():
    m0 = world(dividends=[(0.25, 2.0)])
    curves, market, hedge = package_inputs(m0, False)
    c = TRSContract.regular("payer", "constant")
    on = par_spread(c, market, curves, hedge)[0]
    after = par_spread(c, market.replace(dividends=DividendSchedule.from_pairs([(0.25 + 1e-9, 2.0)])),
                       curves, hedge)[0]
    before = par_spread(c, market.replace(dividends=DividendSchedule.from_pairs([(0.25 - 1e-9, 2.0)])),
                        curves, hedge)[0]
    assert on == pytest.approx(after, abs=1e-9)
    assert abs(on - before) > 1e-6


def test_dividends_after_maturity_are_ignored():
    wd = world(dividends=[(0.5, 1.0)])
    curves, market, hedge = package_inputs(wd, False)
    c = TRSContract.regular("payer", "resetting")
    late = market.replace(dividends=DividendSchedule.from_pairs([(0.5, 1.0), (1.0, 5.0), (1.5, 3.0)]))
    assert par_spread(c, market, curves, hedge)[0] == par_spread(c, late, curves, hedge)[0]


# ----------------------------------------------------------- Table 1 identities

CONFIGS = [
    ("payer", "resetting", HedgeSpec.buy_and_hold()),
    ("payer", "constant", HedgeSpec.stock_lending(0.05)),
    ("payer", "resetting", HedgeSpec.blended(0.5, 0.05)),
    ("receiver", "constant", HedgeSpec.stock_borrowing(0.05)),
    ("receiver", "resetting", HedgeSpec.stock_borrowing(0.05)),
]


@pytest.mark.parametrize("direction,mode,hedge", CONFIGS)
@pytest.mark.parametrize("expectation", list(ExpectationMode))
def test_par_identities(scenario, direction, mode, hedge, expectation):
    c = TRSContract.regular(direction, mode, expectation_mode=expectation)
    K, b = par_spread(c, scenario.market, scenario.curves, hedge)
    assert (b.rate_leg + b.dividend_tax_cost + b.tobin_cost) / b.annuity == pytest.approx(K, abs=1e-12)
    v_par = trs_value(c.with_spread(K), scenario.market, scenario.curves, hedge)
    assert abs(v_par) <= 1e-10 * b.annuity
    # affine in K with slope -annuity (receiver) or +annuity (payer)
    slope = -b.annuity if direction == "receiver" else b.annuity
    v0 = trs_value(c.with_spread(0.0), scenario.market, scenario.curves, hedge)
    v1 = trs_value(c.with_spread(0.01), scenario.market, scenario.curves, hedge)
    assert (v1 - v0) / 0.01 == pytest.approx(slope, abs=1e-12)
    assert -v0 / slope == pytest.approx(K, abs=1e-12)


def test_one_bp_above_par_for_resetting_receiver(scenario):
    h = HedgeSpec.stock_borrowing(0.05)
    c = TRSContract.regular("receiver", "resetting")
    K, b = par_spread(c, scenario.market, scenario.curves, h)
    v = trs_value(c.with_spread(K + 1e-4), scenario.market, scenario.curves, h)
    assert v == pytest.approx(-b.annuity * 1e-4, abs=1e-12)


def test_legs_sum_to_value(scenario):
    c = TRSContract.regular("payer", "constant", spread=0.01)
    legs = trs_legs(c, scenario.market, scenario.curves, scenario.hedge)
    assert legs.total == legs.performance + legs.dividends + legs.funding + legs.tobin


@pytest.mark.parametrize("mode", ["constant", "resetting"])
def test_blending_endpoints(scenario, mode):
    c = TRSContract.regular("payer", mode)
    m, cv = scenario.market, scenario.curves
    assert par_spread(c, m, cv, HedgeSpec.blended(0.0, 0.05))[0] == par_spread(c, m, cv, HedgeSpec.buy_and_hold())[0]
    assert par_spread(c, m, cv, HedgeSpec.blended(1.0, 0.05))[0] == par_spread(c, m, cv, HedgeSpec.stock_lending(0.05))[0]


def test_lending_and_borrowing_hedges_share_forward_inputs(scenario):
    from trs_fva.forwards import ForwardCurve
    T = np.linspace(0, 1, 13)
    a = ForwardCurve.build(scenario.market, HedgeSpec.stock_lending(0.05), scenario.curves)(T)
    b = ForwardCurve.build(scenario.market, HedgeSpec.stock_borrowing(0.05), scenario.curves)(T)
    assert np.array_equal(a, b)


def K_of(scenario, **kw):
    direction = kw.pop("direction", "payer")
    mode = kw.pop("mode", "resetting")
    w = kw.pop("w")
    sc = scenario.bumped("w", w)
    for name, val in kw.items():
        sc = sc.bumped(name, val)
    c = TRSContract.regular(direction, mode)
    return par_spread(c, sc.market, sc.curves, sc.hedge)[0]


@pytest.mark.parametrize("mode", ["constant", "resetting"])
def test_continuity_in_w(scenario, mode):
    """K(w) is Lipschitz: halving the grid step halves the largest jump."""
    coarse = np.linspace(0, 1, 501)
    fine = np.linspace(0, 1, 1001)
    jc = np.abs(np.diff([K_of(scenario, w=w, mode=mode) for w in coarse])).max()
    jf = np.abs(np.diff([K_of(scenario, w=w, mode=mode) for w in fine])).max()
    assert jf == pytest.approx(jc / 2, rel=0.02)
    total = abs(K_of(scenario, w=1.0, mode=mode) - K_of(scenario, w=0.0, mode=mode))
    assert jf <= 2e-3 * total


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.14), st.floats(1e-4, 0.01))
def test_rho_B_increases_K_under_lending(scenario, rho_B, step):
    assert K_of(scenario, w=1.0, rho_B=rho_B + step) > K_of(scenario, w=1.0, rho_B=rho_B)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.02), st.floats(1e-4, 0.005), st.floats(0.05, 1.0))
def test_repo_fee_lowers_K_unless_buy_and_hold(scenario, fee, step, w):
    assert K_of(scenario, w=w, repo_fee=fee + step) < K_of(scenario, w=w, repo_fee=fee)
    assert K_of(scenario, w=0.0, repo_fee=fee + step) == K_of(scenario, w=0.0, repo_fee=fee)
