"""Piecewise-flat instantaneous rate curves and the derived discount curves.

All curves are anchored at valuation time t = 0.  A pillar ``(t_i, r_i)``
means the instantaneous rate equals ``r_i`` on ``[t_i, t_{i+1})``; the first
rate is extended flat to the left and the last one flat to the right, so that
integrals of the rate (and hence zero-coupon bonds) are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class YieldCurve:
    """Immutable piecewise-flat instantaneous rate term structure.

    Attributes
    ----------
    times : tuple of float
        Pillar times in year fractions (ACT/365), strictly increasing, >= 0.
    rates : tuple of float
        Instantaneous continuously-compounded rates, one per pillar.
    """

    times: tuple[float, ...]
    rates: tuple[float, ...]
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _r: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if t.ndim != 1 or t.size == 0 or t.shape != r.shape:
            raise ValueError("curve needs matching, non-empty times and rates")
        if np.any(t < 0.0):
            raise ValueError("pillar times must be >= 0")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("pillar times must be strictly increasing")
        if not np.all(np.isfinite(r)):
            raise ValueError("rates must be finite")
        object.__setattr__(self, "times", tuple(float(v) for v in t))
        object.__setattr__(self, "rates", tuple(float(v) for v in r))
        # integral of the rate from 0 up to each pillar
        cum = np.empty_like(t)
        cum[0] = r[0] * t[0]
        cum[1:] = cum[0] + np.cumsum(r[:-1] * np.diff(t))
        t.setflags(write=False)
        r.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_r", r)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def flat(cls, rate: float) -> "YieldCurve":
        return cls((0.0,), (rate,))

    @classmethod
    def from_pillars(cls, pillars: Iterable[tuple[float, float]]) -> "YieldCurve":
        pillars = list(pillars)
        return cls(tuple(p[0] for p in pillars), tuple(p[1] for p in pillars))

    @classmethod
    def from_config(cls, block: Sequence[Mapping[str, float]]) -> "YieldCurve":
        """Build from a list of ``{"time": ..., "rate": ...}`` entries."""
        return cls.from_pillars((float(p["time"]), float(p["rate"])) for p in block)

    def to_config(self) -> list[dict[str, float]]:
        return [{"time": t, "rate": r} for t, r in zip(self.times, self.rates)]

    def rate_at(self, t):
        """Instantaneous rate at time(s) ``t`` (right-continuous steps)."""
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self._t, t, side="right") - 1, 0, None)
        out = self._r[idx]
        return float(out) if out.ndim == 0 else out

    def integral(self, T):
        """Exact integral of the instantaneous rate over ``[0, T]``."""
        T = np.asarray(T, dtype=float)
        idx = np.searchsorted(self._t, T, side="right") - 1
        left = idx < 0
        idx = np.clip(idx, 0, None)
        out = self._cum[idx] + self._r[idx] * (T - self._t[idx])
        out = np.where(left, self._r[0] * T, out)
        return float(out) if out.ndim == 0 else out

    def discount(self, T):
        """Zero-coupon bond P(0, T)."""
        return np.exp(-self.integral(T))

    def shifted(self, shift: float) -> "YieldCurve":
        """Parallel shift of the instantaneous rates."""
        return YieldCurve(self.times, tuple(r + shift for r in self.rates))

    def scaled(self, factor: float) -> "YieldCurve":
        return YieldCurve(self.times, tuple(r * factor for r in self.rates))


def combine(terms: Sequence[tuple[float, YieldCurve]], constant: float = 0.0) -> YieldCurve:
    """Pointwise linear combination ``constant + sum(c * curve)``.

    The result lives on the union of the pillar grids, which keeps the
    combination exact for piecewise-flat inputs.
    """
    grid = np.unique(np.concatenate([np.asarray(c.times) for _, c in terms]))
    rates = np.full(grid.shape, float(constant))
    for coef, curve in terms:
        rates = rates + coef * np.asarray(curve.rate_at(grid))
    return YieldCurve(tuple(grid), tuple(rates))


def zero_bond(curve: YieldCurve, t: float, T: float) -> float:
    """P_t(T; curve) = exp(-int_t^T rate du) under deterministic rates."""
    if T < t:
        raise DomainError(f"zero_bond needs t <= T, got t={t}, T={T}")
    if t < 0:
        raise DomainError("zero_bond needs t >= 0")
    return float(np.exp(-(curve.integral(T) - curve.integral(t))))


def simple_period_rate(curve: YieldCurve, T_prev, T):
    """Simply-compounded forward rate ``(P(T_prev)/P(T) - 1) / (T - T_prev)``.

    Accepts scalars or equally shaped arrays.
    """
    T_prev = np.asarray(T_prev, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(T <= T_prev):
        raise DomainError("simple_period_rate needs T_prev < T")
    out = np.expm1(curve.integral(T) - curve.integral(T_prev)) / (T - T_prev)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CurveSet:
    """The five term structures used by the pricer, all valued at t = 0.

    ``funding`` is the effective unsecured funding curve r, ``collateral`` the
    effective collateral accrual curve c, ``ois`` the overnight benchmark e,
    ``repo_fee`` the proportional repo fee and ``libor_projection`` the curve
    that projects the floating fixings of the funding leg.
    """

    funding: YieldCurve
    collateral: YieldCurve
    ois: YieldCurve
    repo_fee: YieldCurve
    libor_projection: YieldCurve

    @classmethod
    def flat(cls, funding=0.0, collateral=0.0, ois=0.0, repo_fee=0.0, libor=0.0) -> "CurveSet":
        return cls(
            YieldCurve.flat(funding),
            YieldCurve.flat(collateral),
            YieldCurve.flat(ois),
            YieldCurve.flat(repo_fee),
            YieldCurve.flat(libor),
        )

    def replace(self, **changes) -> "CurveSet":
        fields = dict(
            funding=self.funding,
            collateral=self.collateral,
            ois=self.ois,
            repo_fee=self.repo_fee,
            libor_projection=self.libor_projection,
        )
        fields.update(changes)
        return CurveSet(**fields)


def blended_repo_curve(curves: CurveSet, alpha: float) -> YieldCurve:
    """Repo-adjusted rate z = -alpha r + (1 + alpha) c - fee."""
    if alpha < 0:
        raise DomainError("repo haircut alpha must be >= 0")
    return combine(
        [(-alpha, curves.funding), (1.0 + alpha, curves.collateral), (-1.0, curves.repo_fee)]
    )


def trs_discount_curve(curves: CurveSet, beta: float) -> YieldCurve:
    """TRS discount rate y = -beta r + (1 + beta) c."""
    if beta < 0:
        raise DomainError("TRS haircut beta must be >= 0")
    if beta == 0.0:
        return curves.collateral
    return combine([(-beta, curves.funding), (1.0 + beta, curves.collateral)])
