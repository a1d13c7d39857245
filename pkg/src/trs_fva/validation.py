"""Analytic-versus-Monte-Carlo checks run by ``trs-fva validate``."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import Scenario
from .forwards import ForwardCurve
from .market import HedgeSpec
from .oracle import SimulationSpec, mc_price_trs, mc_spot_moments
from .trs import Direction, NotionalMode, par_spread, trs_legs

Z_LIMIT = 3.0


@dataclass(frozen=True)
class Check:
    name: str
    estimate: float
    target: float
    stderr: float
    abs_tol: float = 1e-12  # floor for legs that are deterministic in the model

    @property
    def z(self) -> float:
        diff = self.estimate - self.target
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else float("inf")
        return diff / self.stderr

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.target) <= Z_LIMIT * self.stderr + self.abs_tol


def receiver_counterpart(scenario: Scenario) -> Scenario:
    """Constant-notional receiver hedged by stock borrowing, same market."""
    contract = replace(scenario.contract, direction=Direction.RECEIVER,
                       notional_mode=NotionalMode.CONSTANT, spread=None)
    return scenario.replace(contract=contract,
                            hedge=HedgeSpec.stock_borrowing(scenario.hedge.alpha))


def par_checks(scenario: Scenario, spec: SimulationSpec, label: str) -> list[Check]:
    """At the analytic par spread: MC value is 0 and the MC dividend leg matches."""
    K, _ = par_spread(scenario.contract, scenario.market, scenario.curves, scenario.hedge)
    contract = scenario.contract.with_spread(K)
    mc = mc_price_trs(contract, scenario.market, scenario.curves, scenario.hedge, spec)
    legs = trs_legs(contract, scenario.market, scenario.curves, scenario.hedge)
    return [
        Check(f"{label}: value at par", mc.value, 0.0, mc.stderr),
        Check(f"{label}: dividend leg", mc.legs["dividends"], legs.dividends,
              mc.leg_stderr["dividends"]),
    ]


def forward_checks(scenario: Scenario, spec: SimulationSpec) -> list[Check]:
    """MC mean spot against the analytic forward on every equity date, per hedge."""
    alpha = scenario.hedge.alpha
    hedges = {
        "buy_and_hold": HedgeSpec.buy_and_hold(),
        "stock_lending": HedgeSpec.stock_lending(alpha),
        "stock_borrowing": HedgeSpec.stock_borrowing(alpha),
    }
    times = np.asarray(scenario.contract.equity_dates[1:])
    out = []
    for name, hedge in hedges.items():
        fwd = ForwardCurve.build(scenario.market, hedge, scenario.curves)
        mom = mc_spot_moments(scenario.market, hedge, scenario.curves, spec, times)
        F = fwd(times)
        for t, m, se, f in zip(times, mom.mean, mom.stderr, F):
            out.append(Check(f"forward {name} T={t:.6g}", float(m), float(f), float(se)))
    return out


def run_validation(scenario: Scenario, spec: SimulationSpec | None = None) -> list[Check]:
    spec = spec or scenario.simulation
    checks = par_checks(scenario, spec, "scenario contract")
    checks += par_checks(receiver_counterpart(scenario), spec, "constant receiver")
    checks += forward_checks(scenario, spec)
    return checks
