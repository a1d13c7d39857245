"""Command line interface: ``trs-fva <command> [--config FILE] [--out FILE]``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import Scenario, load_scenario, default_scenario
from .errors import ConfigError, DomainError, SimulationError, UnsupportedConfiguration
from .expansion import approx_par_spread
from .forwards import forward_price
from .sweep import (
    run_sensitivities,
    run_sweep,
    sensitivities_csv,
    sweep_csv,
    to_csv,
    write_dat_files,
)
from .trs import par_spread, trs_legs
from .validation import run_validation


def _par(sc: Scenario, args) -> str:
    K, b = par_spread(sc.contract, sc.market, sc.curves, sc.hedge)
    return to_csv(
        ("K_percent", "spread", "rate_leg", "dividend_tax_cost", "tobin_cost", "annuity"),
        [(100.0 * K, K, b.rate_leg, b.dividend_tax_cost, b.tobin_cost, b.annuity)],
    )


def _value(sc: Scenario, args) -> str:
    contract = sc.contract
    if args.spread is not None:
        contract = contract.with_spread(args.spread)
    if contract.spread is None:
        raise ConfigError("contract.spread: needed by 'value' (or pass --spread)")
    legs = trs_legs(contract, sc.market, sc.curves, sc.hedge)
    return to_csv(
        ("spread", "performance", "dividends", "funding", "tobin", "value"),
        [(contract.spread, legs.performance, legs.dividends, legs.funding, legs.tobin, legs.total)],
    )


def _forward(sc: Scenario, args) -> str:
    times = sc.contract.equity_dates
    F = forward_price(sc.market, sc.hedge, sc.curves, list(times))
    return to_csv(("time", "forward"), zip(times, (float(f) for f in F)))


def _expand(sc: Scenario, args) -> str:
    K, _ = par_spread(sc.contract, sc.market, sc.curves, sc.hedge)
    a = approx_par_spread(sc.hedge, sc.contract, sc.market, sc.curves)
    return to_csv(
        ("K_exact", "K_approx", "rate_term", "dividend_term", "tobin_term", "annuity"),
        [(K, a.spread, a.rate_term, a.dividend_term, a.tobin_term, a.annuity)],
    )


def _sweep(sc: Scenario, args) -> str:
    rows = run_sweep(sc, threads=args.threads or 1)
    if args.dat:
        write_dat_files(rows, args.dat, stem=f"sweep_{sc.sweep.axis}")
    return sweep_csv(rows)


def _sens(sc: Scenario, args) -> str:
    return sensitivities_csv(run_sensitivities(sc))


def _validate(sc: Scenario, args) -> str:
    checks = run_validation(sc)
    header = f"{'check':<44} {'estimate':>16} {'target':>16} {'stderr':>11} {'z':>7}  result"
    lines = [header]
    for c in checks:
        lines.append(
            f"{c.name:<44} {c.estimate:>16.9g} {c.target:>16.9g} {c.stderr:>11.3g} "
            f"{c.z:>7.2f}  {'PASS' if c.passed else 'FAIL'}"
        )
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed} passed, {failed} failed (tolerance 3 SE)")
    args.failed = failed > 0
    return "\n".join(lines) + "\n"


COMMANDS = {
    "par": (_par, "par spread and its breakdown"),
    "value": (_value, "leg values at a given spread"),
    "forward": (_forward, "hedge forwards on the equity dates"),
    "expand": (_expand, "exact versus first-order par spread"),
    "sweep": (_sweep, "par spread over the [sweep] grid"),
    "sens": (_sens, "bump-and-revalue sensitivities in bp"),
    "validate": (_validate, "Monte Carlo checks of the analytic results"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trs-fva", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="scenario TOML (default: bundled default)")
        p.add_argument("--out", type=Path, help="write output here instead of stdout")
        p.add_argument("--paths", type=int, help="Monte Carlo paths")
        p.add_argument("--seed", type=int, help="Monte Carlo seed")
        p.add_argument("--threads", type=int, help="worker threads")
        if name == "value":
            p.add_argument("--spread", type=float, help="spread as a decimal rate")
        if name == "sweep":
            p.add_argument("--dat", type=Path, help="directory for two-column .dat files")
    return parser


def _scenario(args) -> Scenario:
    sc = load_scenario(args.config) if args.config else default_scenario()
    sim = sc.simulation
    changes = {k: getattr(args, k) for k in ("paths", "seed", "threads") if getattr(args, k) is not None}
    if changes:
        try:
            sim = replace(sim, **changes)
        except ValueError as exc:
            raise ConfigError(f"simulation: {exc}") from None
    return sc.replace(simulation=sim)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.failed = False
    try:
        sc = _scenario(args)
        text = COMMANDS[args.command][0](sc, args)
    except (ConfigError, UnsupportedConfiguration, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 1 if args.failed else 0


if __name__ == "__main__":
    sys.exit(main())
