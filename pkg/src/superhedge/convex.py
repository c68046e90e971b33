"""One-dimensional convex-analysis primitives for one-step super-hedging.

The infimum super-hedging cost of a claim ``g(Y)`` when the current price is
``y`` and the next price lives on a support set ``D`` is

    p(g) = -f**(y),   f = -g + indicator(D),

i.e. the concave envelope of ``g`` relative to ``D`` evaluated at ``y`` when
``y`` lies in the convex hull of ``D``, and ``-inf`` otherwise. ``-inf`` is a
legitimate value (an immediate profit), not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .lp import linprog
from .payoffs import PiecewisePayoff

INF = math.inf
PRICE_TOL = 1e-9

Payoff = Union[Callable[[float], float], PiecewisePayoff]


class AIPViolation(ValueError):
    """The current price is outside the convex hull of the next-price support."""


class InfeasibleMajorantError(ValueError):
    """No affine function dominates the payoff on the support."""


@dataclass(frozen=True)
class SupportSet:
    """Conditional support of the next price: finite points or an interval.

    ``upper`` may be ``inf`` for intervals. For finite supports ``lower`` and
    ``upper`` are the smallest and largest points (the conditional essential
    infimum and supremum).
    """

    lower: float
    upper: float
    points: tuple[float, ...] | None = None

    @classmethod
    def finite(cls, points: Sequence[float]) -> "SupportSet":
        pts = tuple(sorted(set(points)))
        if not pts:
            raise ValueError("support set must be non-empty")
        if pts[0] < 0:
            raise ValueError("support points must be non-negative")
        return cls(pts[0], pts[-1], pts)

    @classmethod
    def interval(cls, lower: float, upper: float) -> "SupportSet":
        if lower < 0:
            raise ValueError("support must be non-negative")
        if not lower <= upper:
            raise ValueError("interval support needs lower <= upper")
        return cls(lower, upper, None)

    @property
    def kind(self) -> str:
        return "finite" if self.points is not None else "interval"

    @property
    def essinf(self) -> float:
        return self.lower

    @property
    def esssup(self) -> float:
        return self.upper

    def hull_contains(self, y) -> bool:
        return self.lower <= y <= self.upper

    def __len__(self) -> int:
        if self.points is None:
            raise TypeError("interval support has no length")
        return len(self.points)


@dataclass(frozen=True)
class OneStepPrice:
    """Price, hedge ratio and whether the price is itself super-hedging."""

    price: float
    theta: float
    attained: bool

    @property
    def immediate_profit(self) -> bool:
        return self.price == -INF


def _values_on(support: SupportSet, g) -> np.ndarray:
    if callable(g):
        return np.array([g(z) for z in support.points], dtype=float)
    vals = np.asarray(g, dtype=float)
    if vals.shape != (len(support.points),):
        raise ValueError("payoff values must align with the support points")
    return vals


def support_function(support: SupportSet, theta: float, shift: float = 0.0) -> float:
    """``sup_{x in D - shift} (-x * theta)``.

    A negative value means the position ``theta`` earns a sure profit: buying
    ``theta`` at ``shift`` gains at least ``-value`` in every state.
    """
    if theta == 0:
        return 0.0
    if support.points is not None:
        return max(-(z - shift) * theta for z in support.points)
    if theta < 0:
        return -(support.upper - shift) * theta if support.upper != INF else INF
    return -(support.lower - shift) * theta


def fenchel_conjugate(support: SupportSet, g, x: float) -> float:
    """Conjugate of ``f = -g + indicator(D)``: ``sup_{z in D} (x z + g(z))``.

    On an interval support ``g`` must be a convex :class:`PiecewisePayoff`; the
    supremum of the convex map ``z -> x z + g(z)`` sits at an endpoint, or
    diverges along ``z -> inf`` when ``x + M > 0``.
    """
    if support.points is not None:
        vals = _values_on(support, g)
        return float(np.max(x * np.asarray(support.points) + vals))
    _require_convex(g)
    lo = x * support.lower + g(support.lower)
    if support.upper == INF:
        if x + g.asymptotic_slope > 0:
            return INF
        return lo
    return max(lo, x * support.upper + g(support.upper))


def _require_convex(g) -> None:
    if not isinstance(g, PiecewisePayoff) or not g.is_convex:
        raise ValueError("interval supports need a convex PiecewisePayoff")
    if g.asymptotic_slope is None or not math.isfinite(g.asymptotic_slope):
        raise InfeasibleMajorantError("convex payoff needs a finite asymptotic slope")


def _finite_biconjugate(z: np.ndarray, vals: np.ndarray, y: float) -> tuple[float, float]:
    """(price, theta) from ``sup_x (x y - f*(x))`` evaluated at the kinks of ``f*``."""
    keep = vals > -INF
    z, vals = z[keep], vals[keep]
    if z.size == 0 or y < z.min() or y > z.max():
        return -INF, math.nan
    if z.size == 1 or z.min() == z.max():
        return float(vals.max()), 0.0
    i, j = np.triu_indices(z.size, k=1)
    dz = z[j] - z[i]
    ok = dz != 0
    kinks = -(vals[j][ok] - vals[i][ok]) / dz[ok]
    conj = np.max(np.multiply.outer(kinks, z) + vals, axis=1)
    phi = kinks * y - conj
    k = int(np.argmax(phi))
    return float(-phi[k]), float(-kinks[k])


def biconjugate_price(support: SupportSet, g, y: float) -> float:
    """Infimum super-hedging cost ``-f**(y)``; ``-inf`` when ``y`` is outside the hull."""
    return one_step_price(support, g, y).price


def one_step_price(support: SupportSet, g, y: float) -> OneStepPrice:
    """Biconjugate price together with a super-hedging ratio.

    For finite supports ``g`` may take the value ``-inf`` at some points (a
    successor that is itself worth ``-inf``); those points impose no
    constraint.
    """
    if support.points is None:
        _require_convex(g)
        if not support.hull_contains(y):
            return OneStepPrice(-INF, math.nan, False)
        return one_step_price_convex(g, y, support.lower, support.upper)
    z = np.asarray(support.points, dtype=float)
    price, theta = _finite_biconjugate(z, _values_on(support, g), y)
    return OneStepPrice(price, theta, price > -INF)


def concave_envelope_relative(g, support: SupportSet, y: float) -> float:
    """``inf {a y + b : a z + b >= g(z) for z in D}``, solved as a 2-variable LP.

    ``y`` must lie in the convex hull of ``D``.
    """
    if not support.hull_contains(y):
        raise AIPViolation(f"y={y} is outside [{support.lower}, {support.upper}]")
    if support.points is None:
        _require_convex(g)
        return one_step_price_convex(g, y, support.lower, support.upper).price
    z = np.asarray(support.points, dtype=float)
    vals = _values_on(support, g)
    A_ub = -np.column_stack([z, np.ones_like(z)])
    res = linprog([y, 1.0], A_ub, -vals, free=True)
    if res.status == "unbounded":
        return -INF
    if not res.optimal:
        raise InfeasibleMajorantError("no affine majorant on the support")
    return res.fun


def one_step_price_convex(g, y, essinf, esssup) -> OneStepPrice:
    """Closed-form price of a convex payoff: the chord of ``g`` over ``[essinf, esssup]``.

    Conventions: a degenerate interval gives ``theta = 0``; an infinite
    ``esssup`` gives ``theta = M``, the asymptotic slope of ``g``. Works with
    exact numbers (``Fraction``) as well as floats.
    """
    if not essinf <= y <= esssup:
        raise AIPViolation(f"y={y} is outside [{essinf}, {esssup}]")
    if esssup == INF:
        slope = getattr(g, "asymptotic_slope", None)
        if slope is None or not math.isfinite(slope):
            raise InfeasibleMajorantError("infinite esssup needs a finite asymptotic slope")
        theta = slope
    elif esssup == essinf:
        theta = 0
    else:
        theta = (g(esssup) - g(essinf)) / (esssup - essinf)
    return OneStepPrice(g(essinf) + theta * (y - essinf), theta, True)
