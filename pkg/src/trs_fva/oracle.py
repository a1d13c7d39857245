"""Monte Carlo cash-flow pricer used as an independent check of the formulas.

Spot dynamics: between dividend dates the stock follows a geometric Brownian
motion whose drift is the hedge growth rate z; at each ex-date it drops by the
hedge's net dividend ``(1 - rho) Q_k``.  Transitions are sampled exactly on a
grid containing every equity, funding and dividend date.

Random numbers come from Philox4x64-10 (numpy's implementation), keyed by the
64-bit seed.  Block ``b`` of paths uses the counter ``(0, 0, 0, b)``, so a
block's draws do not depend on how blocks are spread over workers.  Each
64-bit output ``x`` becomes the uniform ``((x >> 11) + 0.5) / 2**53`` and then
a standard normal through the inverse normal CDF.  Draws are consumed path by
path: path ``p`` of a block uses outputs ``p * n_steps`` to
``(p + 1) * n_steps - 1``.  With antithetic sampling, the second half of a block
reuses the first half's normals with flipped sign.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .curves import CurveSet, YieldCurve, simple_period_rate, trs_discount_curve
from .errors import SimulationError
from .market import HedgeSpec, MarketSnapshot, effective_dividend_tax, effective_hedge_curve
from .trs import Direction, NotionalMode, TRSContract, check_pairing, eta

MAX_INVALID_FRACTION = 1e-4
LEGS = ("performance", "dividends", "funding", "tobin")


@dataclass(frozen=True)
class SimulationSpec:
    paths: int = 200_000
    seed: int = 20190418
    antithetic: bool = False
    block_size: int = 1 << 16
    threads: int = 1

    def __post_init__(self):
        if self.paths < 2:
            raise ValueError("need at least two paths")
        if self.antithetic and (self.paths % 2 or self.block_size % 2):
            raise ValueError("antithetic sampling needs even path and block counts")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def blocks(self) -> list[tuple[int, int]]:
        """(block index, number of paths) in a fixed order."""
        out = []
        done = 0
        b = 0
        while done < self.paths:
            m = min(self.block_size, self.paths - done)
            out.append((b, m))
            done += m
            b += 1
        return out


def standard_normals(seed: int, block: int, n_paths: int, n_steps: int,
                     antithetic: bool = False) -> np.ndarray:
    """Normals of shape (n_paths, n_steps) for one block (see module docs)."""
    m = n_paths // 2 if antithetic else n_paths
    gen = np.random.Philox(key=seed, counter=[0, 0, 0, block])
    raw = gen.random_raw(m * n_steps)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    z = ndtri(u).reshape(m, n_steps)
    if antithetic:
        z = np.concatenate([z, -z])
    return z


@dataclass(frozen=True)
class _Dynamics:
    spot: float
    vol: float
    growth: YieldCurve
    div_times: np.ndarray
    div_net: np.ndarray

    @classmethod
    def build(cls, market: MarketSnapshot, hedge: HedgeSpec, curves: CurveSet) -> "_Dynamics":
        rho = effective_dividend_tax(hedge, market.taxes)
        return cls(
            spot=market.spot,
            vol=market.vol,
            growth=effective_hedge_curve(hedge, curves),
            div_times=np.asarray(market.dividends.times, dtype=float),
            div_net=(1.0 - rho) * np.asarray(market.dividends.amounts, dtype=float),
        )

    def grid(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        horizon = times.max()
        divs = self.div_times[self.div_times <= horizon]
        return np.unique(np.concatenate([[0.0], times, divs]))

    def simulate(self, grid: np.ndarray, normals: np.ndarray):
        """Cum-dividend spots on ``grid`` and a validity mask."""
        n_paths = normals.shape[0]
        dt = np.diff(grid)
        integ = self.growth.integral(grid)
        log_growth = np.diff(integ) - 0.5 * self.vol**2 * dt
        shocks = self.vol * np.sqrt(dt)
        drops = np.zeros(grid.shape)
        for tk, qk in zip(self.div_times, self.div_net):
            hit = np.nonzero(grid == tk)[0]
            if hit.size:
                drops[hit[0]] += qk
        spots = np.empty((n_paths, grid.size))
        spots[:, 0] = self.spot
        valid = np.ones(n_paths, dtype=bool)
        for m in range(1, grid.size):
            ex = spots[:, m - 1] - drops[m - 1]
            if drops[m - 1] > 0.0:
                bad = ex <= 0.0
                if bad.any():
                    valid &= ~bad
                    ex = np.where(bad, np.nan, ex)
            spots[:, m] = ex * np.exp(log_growth[m - 1] + shocks[m - 1] * normals[:, m - 1])
        return spots, valid


@dataclass(frozen=True)
class PathSet:
    times: np.ndarray
    spots: np.ndarray
    valid: np.ndarray

    def at(self, t: float) -> np.ndarray:
        idx = np.nonzero(self.times == t)[0]
        if not idx.size:
            raise KeyError(f"time {t} not on the simulation grid")
        return self.spots[:, idx[0]]


def simulate_paths(market: MarketSnapshot, hedge: HedgeSpec, curves: CurveSet,
                   spec: SimulationSpec, times) -> PathSet:
    """Simulate cum-dividend spots on ``times`` (plus dividend dates and 0)."""
    dyn = _Dynamics.build(market, hedge, curves)
    grid = dyn.grid(times)
    n_steps = grid.size - 1

    def run(block):
        b, m = block
        z = standard_normals(spec.seed, b, m, n_steps, spec.antithetic)
        return dyn.simulate(grid, z)

    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        parts = list(pool.map(run, spec.blocks()))
    spots = np.concatenate([p[0] for p in parts])
    valid = np.concatenate([p[1] for p in parts])
    _check_invalid(valid)
    return PathSet(grid, spots, valid)


def _check_invalid(valid: np.ndarray) -> None:
    frac = 1.0 - valid.mean()
    if frac > MAX_INVALID_FRACTION:
        raise SimulationError(
            f"{frac:.4%} of paths hit a non-positive spot at a dividend date"
        )


@dataclass
class _Moments:
    """Running count, mean and sum of squared deviations (pairwise merge)."""

    count: int = 0
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m2: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def of(cls, samples: np.ndarray) -> "_Moments":
        mean = samples.mean(axis=0)
        return cls(samples.shape[0], mean, ((samples - mean) ** 2).sum(axis=0))

    def merge(self, other: "_Moments") -> "_Moments":
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        return _Moments(n, mean, m2)

    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.mean, np.inf)
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


@dataclass(frozen=True)
class SimulationResult:
    value: float
    stderr: float
    legs: dict
    leg_stderr: dict
    samples: int
    invalid_paths: int


class _CashFlows:
    """Discounted contractual cash flows of a TRS, evaluated path by path."""

    def __init__(self, contract: TRSContract, market: MarketSnapshot, curves: CurveSet,
                 hedge: HedgeSpec):
        check_pairing(contract, hedge)
        if contract.spread is None:
            raise ValueError("contract spread is not set")
        self.c = contract
        self.S0 = market.spot
        y = trs_discount_curve(curves, contract.beta)
        self.T = np.asarray(contract.equity_dates)
        self.Tp = np.asarray(contract.funding_dates)
        self.disc_T = y.discount(self.T)
        xp = np.diff(self.Tp)
        libor = np.atleast_1d(
            simple_period_rate(curves.libor_projection, self.Tp[:-1], self.Tp[1:])
        )
        self.coupon = xp * y.discount(self.Tp[1:]) * (libor + contract.spread)
        self.eta_p = np.array([eta(t, self.T) for t in self.Tp[1:]])
        tk = np.asarray(market.dividends.times, dtype=float)
        Qk = np.asarray(market.dividends.amounts, dtype=float)
        live = tk < self.T[-1]
        self.tk = tk[live]
        self.pass_through = (1.0 - market.taxes.rho_T) * Qk[live] * y.discount(self.tk)
        self.fix_k = self.T[np.searchsorted(self.T, self.tk, side="right") - 1]
        self.tau = market.taxes.tau if contract.tobin_enabled else 0.0
        self.sign = 1.0 if contract.direction is Direction.RECEIVER else -1.0

    def times(self) -> np.ndarray:
        return np.unique(np.concatenate([self.T, self.Tp]))

    def evaluate(self, paths: PathSet) -> np.ndarray:
        """Per-path leg values, shape (n_paths, 4)."""
        S = np.stack([paths.at(t) for t in self.T], axis=1)
        out = np.empty((S.shape[0], 4))
        n = len(self.T) - 1
        if self.c.notional_mode is NotionalMode.CONSTANT:
            ret = S[:, 1:] / S[:, :-1]
            perf = ((ret - 1.0) * self.disc_T[1:]).sum(axis=1)
            divs = np.zeros(S.shape[0])
            for amount, fix in zip(self.pass_through, self.fix_k):
                divs += amount / paths.at(fix)
            funding = -np.full(S.shape[0], self.coupon.sum())
            if self.c.direction is Direction.RECEIVER:
                rebal = (np.maximum(ret[:, : n - 1] - 1.0, 0.0) * self.disc_T[1:n]).sum(axis=1)
                tobin = -self.tau * (rebal + self.disc_T[n] * ret[:, n - 1])
            else:
                rebal = (np.maximum(1.0 - ret[:, : n - 1], 0.0) * self.disc_T[1:n]).sum(axis=1)
                tobin = -self.tau * (1.0 + rebal)
        else:
            perf = (np.diff(S, axis=1) * self.disc_T[1:]).sum(axis=1) / self.S0
            divs = np.full(S.shape[0], self.pass_through.sum() / self.S0)
            notional = np.stack([paths.at(t) for t in self.eta_p], axis=1) / self.S0
            funding = -(notional * self.coupon).sum(axis=1)
            if self.c.direction is Direction.RECEIVER:
                tobin = -self.tau * self.disc_T[n] * S[:, n] / self.S0
            else:
                tobin = np.full(S.shape[0], -self.tau)
        out[:, 0] = self.sign * perf
        out[:, 1] = self.sign * divs
        out[:, 2] = self.sign * funding
        out[:, 3] = tobin
        return out


def mc_price_trs(contract: TRSContract, market: MarketSnapshot, curves: CurveSet,
                 hedge: HedgeSpec, spec: SimulationSpec) -> SimulationResult:
    """Monte Carlo value of the TRS (with hedge Tobin costs) at its spread."""
    flows = _CashFlows(contract, market, curves, hedge)
    dyn = _Dynamics.build(market, hedge, curves)
    grid = dyn.grid(flows.times())
    n_steps = grid.size - 1

    def run(block):
        b, m = block
        z = standard_normals(spec.seed, b, m, n_steps, spec.antithetic)
        spots, valid = dyn.simulate(grid, z)
        legs = flows.evaluate(PathSet(grid, spots, valid))
        if spec.antithetic:
            half = m // 2
            legs = 0.5 * (legs[:half] + legs[half:])
            valid = valid[:half] & valid[half:]
        sample = np.column_stack([legs, legs.sum(axis=1)])
        return _Moments.of(sample[valid]), int((~valid).sum())

    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        parts = list(pool.map(run, spec.blocks()))

    moments = _Moments()
    invalid = 0
    for mom, bad in parts:
        moments = moments.merge(mom)
        invalid += bad
    units = moments.count + invalid
    if invalid / units > MAX_INVALID_FRACTION:
        raise SimulationError(f"{invalid} of {units} samples invalid")

    se = moments.stderr()
    return SimulationResult(
        value=float(moments.mean[4]),
        stderr=float(se[4]),
        legs={k: float(v) for k, v in zip(LEGS, moments.mean[:4])},
        leg_stderr={k: float(v) for k, v in zip(LEGS, se[:4])},
        samples=moments.count,
        invalid_paths=invalid,
    )


@dataclass(frozen=True)
class SpotMoments:
    """Monte Carlo mean and standard error of the spot at each requested time."""

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def mc_spot_moments(market: MarketSnapshot, hedge: HedgeSpec, curves: CurveSet,
                    spec: SimulationSpec, times) -> SpotMoments:
    """Block-wise E[S_t]; memory stays bounded by one block of paths."""
    times = np.asarray(times, dtype=float)
    dyn = _Dynamics.build(market, hedge, curves)
    grid = dyn.grid(times)
    cols = np.searchsorted(grid, times)
    n_steps = grid.size - 1

    def run(block):
        b, m = block
        z = standard_normals(spec.seed, b, m, n_steps, spec.antithetic)
        spots, valid = dyn.simulate(grid, z)
        spots = spots[:, cols]
        if spec.antithetic:
            half = m // 2
            spots = 0.5 * (spots[:half] + spots[half:])
            valid = valid[:half] & valid[half:]
        return _Moments.of(spots[valid]), int((~valid).sum())

    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        parts = list(pool.map(run, spec.blocks()))
    moments = _Moments()
    invalid = 0
    for mom, bad in parts:
        moments = moments.merge(mom)
        invalid += bad
    if invalid / (moments.count + invalid) > MAX_INVALID_FRACTION:
        raise SimulationError(f"{invalid} samples invalid")
    return SpotMoments(times, moments.mean, moments.stderr(), moments.count)
