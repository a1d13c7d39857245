"""Parameter sweeps, bump-and-revalue sensitivities and CSV output."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

from .config import Scenario, SweepSpec
from .trs import SpreadBreakdown, par_spread

BREAKDOWN_COLUMNS = ("rate_leg", "dividend_tax_cost", "tobin_cost", "annuity")
SWEEP_HEADER = ("axis", "axis_value", "series", "series_value", "K_percent") + BREAKDOWN_COLUMNS
SENS_HEADER = ("bump", "size", "K_percent", "delta_K_bp")

# (label, parameter, size); rate bumps in absolute terms, equity bumps relative
SENSITIVITY_BUMPS = (
    ("spot", "spot_bump", 0.10),
    ("spot", "spot_bump", -0.10),
    ("dividends", "dividend_bump", 0.10),
    ("dividends", "dividend_bump", -0.10),
    ("funding", "funding_bump", 0.0010),
    ("funding", "funding_bump", -0.0010),
    ("collateral", "collateral_bump", 0.0010),
    ("collateral", "collateral_bump", -0.0010),
)


def fmt(value) -> str:
    """Shortest round-trip text of a float; integers and strings pass through."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def price(scenario: Scenario) -> tuple[float, SpreadBreakdown]:
    return par_spread(scenario.contract, scenario.market, scenario.curves, scenario.hedge)


def _ordered_map(fn, items: list, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_sweep(scenario: Scenario, sweep: SweepSpec | None = None, threads: int = 1) -> list[tuple]:
    """One row per (series value, grid point), series-major."""
    sweep = sweep or scenario.sweep
    if sweep is None:
        raise ValueError("scenario has no [sweep] section and no sweep was given")
    points = [(s, x) for s in sweep.series_values for x in sweep.grid]

    def row(point):
        s, x = point
        sc = scenario if s is None else scenario.bumped(sweep.series, s)
        K, b = price(sc.bumped(sweep.axis, x))
        return (sweep.axis, x, sweep.series or "", s, 100.0 * K,
                b.rate_leg, b.dividend_tax_cost, b.tobin_cost, b.annuity)

    return _ordered_map(row, points, threads)


def sweep_csv(rows: Sequence[tuple]) -> str:
    return to_csv(SWEEP_HEADER, rows)


def write_dat_files(rows: Sequence[tuple], directory: str | Path, stem: str = "sweep") -> list[Path]:
    """Two-column ``axis_value K_percent`` files, one per series value."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    groups: dict = {}
    for r in rows:
        groups.setdefault((r[2], r[3]), []).append((r[1], r[4]))
    written = []
    for (series, value), pts in groups.items():
        name = stem if not series else f"{stem}_{series}_{fmt(value)}"
        path = directory / f"{name}.dat"
        path.write_text("".join(f"{fmt(x)} {fmt(k)}\n" for x, k in pts), encoding="utf-8")
        written.append(path)
    return written


def run_sensitivities(scenario: Scenario) -> list[tuple]:
    """Par spread changes in bp for the standard equity and rate bumps."""
    base, _ = price(scenario)
    rows = [("base", 0.0, 100.0 * base, 0.0)]
    for label, param, size in SENSITIVITY_BUMPS:
        K, _ = price(scenario.bumped(param, size))
        rows.append((label, size, 100.0 * K, 1e4 * (K - base)))
    return rows


def sensitivities_csv(rows: Sequence[tuple]) -> str:
    return to_csv(SENS_HEADER, rows)
