"""Scenario files.

A scenario is a TOML document with the sections ``market``, ``taxes``,
``hedge``, ``contract``, ``curves`` and optionally ``simulation`` and
``sweep``.  The grammar is documented in the README; ``default.toml``
in ``trs_fva.scenarios`` is a complete example.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .blackmodel import ExpectationMode
from .curves import CurveSet, YieldCurve
from .errors import ConfigError
from .market import DividendSchedule, HedgeSpec, MarketSnapshot, Strategy, TaxRegime
from .oracle import SimulationSpec
from .trs import Direction, NotionalMode, TRSContract, check_pairing, schedule

CURVE_NAMES = ("funding", "collateral", "ois", "repo_fee", "libor")
SWEEP_AXES = (
    "rho_B",
    "w",
    "repo_fee",
    "funding_bump",
    "collateral_bump",
    "spot_bump",
    "dividend_bump",
)


@dataclass(frozen=True)
class SweepSpec:
    """Parameter grid for a sweep, optionally crossed with a series parameter."""

    axis: str
    grid: tuple[float, ...]
    series: str | None = None
    series_values: tuple[float | None, ...] = (None,)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: unknown axis {self.axis!r}; expected one of {SWEEP_AXES}")
        if self.series is not None and self.series not in SWEEP_AXES:
            raise ConfigError(f"sweep.series.name: unknown parameter {self.series!r}")
        if self.series == self.axis:
            raise ConfigError("sweep.series.name: series must differ from the axis")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ConfigError("sweep.grid: must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("sweep.grid: must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.series is None:
            object.__setattr__(self, "series_values", (None,))
        else:
            vals = tuple(float(v) for v in self.series_values)
            if not vals:
                raise ConfigError("sweep.series.values: must not be empty")
            object.__setattr__(self, "series_values", vals)


@dataclass(frozen=True)
class Scenario:
    market: MarketSnapshot
    curves: CurveSet
    hedge: HedgeSpec
    contract: TRSContract
    simulation: SimulationSpec = SimulationSpec()
    sweep: SweepSpec | None = None

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def bumped(self, name: str, value: float) -> "Scenario":
        """Scenario with one sweep parameter set.

        ``rho_B`` and ``w`` are levels, ``repo_fee`` sets a flat fee,
        ``funding_bump``/``collateral_bump`` are parallel shifts and
        ``spot_bump``/``dividend_bump`` are relative changes.
        """
        m, c = self.market, self.curves
        if name == "rho_B":
            t = m.taxes
            return self.replace(market=m.replace(taxes=replace(t, rho_B=value)))
        if name == "w":
            return self.replace(hedge=HedgeSpec.blended(value, self.hedge.alpha))
        if name == "repo_fee":
            return self.replace(curves=c.replace(repo_fee=YieldCurve.flat(value)))
        if name == "funding_bump":
            return self.replace(curves=c.replace(funding=c.funding.shifted(value)))
        if name == "collateral_bump":
            return self.replace(curves=c.replace(collateral=c.collateral.shifted(value)))
        if name == "spot_bump":
            return self.replace(market=m.replace(spot=m.spot * (1.0 + value)))
        if name == "dividend_bump":
            return self.replace(market=m.replace(dividends=m.dividends.scaled(1.0 + value)))
        raise ConfigError(f"unknown parameter {name!r}")


def _section(doc: Mapping[str, Any], name: str, required: bool = True) -> Mapping[str, Any]:
    if name not in doc:
        if required:
            raise ConfigError(f"[{name}]: missing section")
        return {}
    block = doc[name]
    if not isinstance(block, Mapping):
        raise ConfigError(f"{name}: expected a table")
    return block


def _number(block: Mapping[str, Any], path: str, key: str, default: Any = ...) -> float:
    if key not in block:
        if default is ...:
            raise ConfigError(f"{path}.{key}: missing value")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _integer(block: Mapping[str, Any], path: str, key: str, default: Any = ...) -> int:
    if key not in block:
        if default is ...:
            raise ConfigError(f"{path}.{key}: missing value")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    return v


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _pairs(value: Any, path: str, keys: tuple[str, str]) -> list[tuple[float, float]]:
    """Accept ``[[t, v], ...]`` or ``[{time = t, <value key> = v}, ...]``."""
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list of {{{keys[0]}, {keys[1]}}} entries")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, Mapping):
            if set(item) != set(keys):
                raise ConfigError(f"{path}[{i}]: expected keys {keys}, got {sorted(item)}")
            item = [item[keys[0]], item[keys[1]]]
        if not isinstance(item, list) or len(item) != 2 or not all(map(_is_number, item)):
            raise ConfigError(f"{path}[{i}]: expected numeric {keys[0]} and {keys[1]}, got {item!r}")
        out.append((float(item[0]), float(item[1])))
    return out


def _numbers(value: Any, path: str) -> list[float]:
    if not isinstance(value, list) or not all(map(_is_number, value)):
        raise ConfigError(f"{path}: expected a list of numbers")
    return [float(x) for x in value]


def _checked(path: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_curves(doc: Mapping[str, Any]) -> CurveSet:
    block = _section(doc, "curves")
    unknown = set(block) - set(CURVE_NAMES)
    if unknown:
        raise ConfigError(f"curves: unknown curve(s) {sorted(unknown)}; expected {CURVE_NAMES}")
    built: dict[str, YieldCurve] = {}

    def build(name: str, stack: tuple[str, ...]) -> YieldCurve:
        if name in built:
            return built[name]
        path = f"curves.{name}"
        if name not in block:
            raise ConfigError(f"{path}: missing curve")
        if name in stack:
            raise ConfigError(f"{path}: circular base reference {' -> '.join(stack + (name,))}")
        spec = block[name]
        if not isinstance(spec, Mapping):
            raise ConfigError(f"{path}: expected a table")
        keys = {"pillars", "rate", "base"} & set(spec)
        if len(keys) != 1:
            raise ConfigError(f"{path}: give exactly one of 'pillars', 'rate' or 'base'")
        if "pillars" in spec:
            curve = _checked(path, lambda: YieldCurve.from_pillars(_pairs(spec["pillars"], f"{path}.pillars", ("time", "rate"))))
        elif "rate" in spec:
            curve = YieldCurve.flat(_number(spec, path, "rate"))
        else:
            base = spec["base"]
            if base not in CURVE_NAMES:
                raise ConfigError(f"{path}.base: unknown curve {base!r}")
            curve = build(base, stack + (name,)).shifted(_number(spec, path, "shift", 0.0))
        built[name] = curve
        return curve

    for name in CURVE_NAMES:
        build(name, ())
    return CurveSet(
        funding=built["funding"],
        collateral=built["collateral"],
        ois=built["ois"],
        repo_fee=built["repo_fee"],
        libor_projection=built["libor"],
    )


def _parse_market(doc: Mapping[str, Any]) -> MarketSnapshot:
    m = _section(doc, "market")
    t = _section(doc, "taxes", required=False)
    divs = _checked(
        "market.dividends",
        lambda: DividendSchedule.from_pairs(_pairs(m.get("dividends", []), "market.dividends", ("time", "amount"))),
    )
    taxes = _checked(
        "taxes",
        lambda: TaxRegime(
            rho_I=_number(t, "taxes", "rho_I", 0.0),
            rho_B=_number(t, "taxes", "rho_B", 0.0),
            rho_T=_number(t, "taxes", "rho_T", 0.0),
            tau=_number(t, "taxes", "tau", 0.0),
        ),
    )
    return _checked(
        "market",
        lambda: MarketSnapshot(
            spot=_number(m, "market", "spot"),
            vol=_number(m, "market", "vol"),
            dividends=divs,
            taxes=taxes,
        ),
    )


def _enum(enum_cls, block: Mapping[str, Any], path: str, key: str, default=...):
    if key not in block:
        if default is ...:
            raise ConfigError(f"{path}.{key}: missing value")
        return enum_cls(default)
    try:
        return enum_cls(block[key])
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{path}.{key}: {block[key]!r} is not one of {choices}") from None


def _parse_hedge(doc: Mapping[str, Any]) -> HedgeSpec:
    h = _section(doc, "hedge")
    strategy = _enum(Strategy, h, "hedge", "strategy")
    alpha = _number(h, "hedge", "alpha", 0.0)
    w = _number(h, "hedge", "w", None)
    return _checked("hedge", lambda: HedgeSpec(strategy, alpha, w))


def _parse_contract(doc: Mapping[str, Any]) -> TRSContract:
    c = _section(doc, "contract")
    path = "contract"
    direction = _enum(Direction, c, path, "direction")
    mode = _enum(NotionalMode, c, path, "notional_mode")
    if "equity_dates" in c:
        equity = _numbers(c["equity_dates"], f"{path}.equity_dates")
        funding = _numbers(c.get("funding_dates", c["equity_dates"]), f"{path}.funding_dates")
    else:
        maturity = _number(c, path, "maturity", 1.0)
        periods = _integer(c, path, "periods", 12)
        funding_periods = _integer(c, path, "funding_periods", periods)
        equity = _checked(path, lambda: schedule(maturity, periods))
        funding = _checked(path, lambda: schedule(maturity, funding_periods))
    tobin = c.get("tobin_enabled", True)
    if not isinstance(tobin, bool):
        raise ConfigError(f"{path}.tobin_enabled: expected true or false")
    return _checked(
        path,
        lambda: TRSContract(
            direction=direction,
            notional_mode=mode,
            equity_dates=equity,
            funding_dates=funding,
            spread=_number(c, path, "spread", None),
            beta=_number(c, path, "beta", 0.0),
            tobin_enabled=tobin,
            expectation_mode=_enum(ExpectationMode, c, path, "expectation_mode", "black"),
        ),
    )


def _parse_simulation(doc: Mapping[str, Any]) -> SimulationSpec:
    s = _section(doc, "simulation", required=False)
    d = SimulationSpec()
    antithetic = s.get("antithetic", d.antithetic)
    if not isinstance(antithetic, bool):
        raise ConfigError("simulation.antithetic: expected true or false")
    return _checked(
        "simulation",
        lambda: SimulationSpec(
            paths=_integer(s, "simulation", "paths", d.paths),
            seed=_integer(s, "simulation", "seed", d.seed),
            antithetic=antithetic,
            threads=_integer(s, "simulation", "threads", d.threads),
        ),
    )


def _parse_sweep(doc: Mapping[str, Any]) -> SweepSpec | None:
    if "sweep" not in doc:
        return None
    s = _section(doc, "sweep")
    if "axis" not in s:
        raise ConfigError("sweep.axis: missing value")
    grid = _numbers(s.get("grid", []), "sweep.grid")
    series = s.get("series")
    if series is None:
        return SweepSpec(s["axis"], tuple(grid))
    if not isinstance(series, Mapping) or "name" not in series:
        raise ConfigError("sweep.series: expected a table with 'name' and 'values'")
    values = _numbers(series.get("values", []), "sweep.series.values")
    return SweepSpec(s["axis"], tuple(grid), series["name"], tuple(values))


def parse_scenario(doc: Mapping[str, Any]) -> Scenario:
    known = {"market", "taxes", "hedge", "contract", "curves", "simulation", "sweep"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}")
    scenario = Scenario(
        market=_parse_market(doc),
        curves=_parse_curves(doc),
        hedge=_parse_hedge(doc),
        contract=_parse_contract(doc),
        simulation=_parse_simulation(doc),
        sweep=_parse_sweep(doc),
    )
    _checked("hedge.strategy", lambda: check_pairing(scenario.contract, scenario.hedge))
    return scenario


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    try:
        return parse_scenario(doc)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return loads_scenario(text, str(path))


def default_scenario() -> Scenario:
    """The bundled synthetic scenario: a 1y monthly resetting payer TRS."""
    text = resources.files("trs_fva.scenarios").joinpath("default.toml").read_text("utf-8")
    return loads_scenario(text, "default.toml")
