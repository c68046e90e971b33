"""Scalar payoffs with convexity and asymptotic-slope metadata."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class PayoffSpecError(ValueError):
    pass


@dataclass(frozen=True)
class PiecewisePayoff:
    """A payoff ``g`` on ``[0, inf)``.

    Three representations are supported:

    * ``pieces``: convex max-affine form ``max_i (a_i x + b_i)``;
    * ``breakpoints``: linear interpolation through ``(xs, ys)`` with end
      slopes extended beyond the outer breakpoints;
    * ``evaluator``: an arbitrary callable (user-supplied payoffs).

    ``asymptotic_slope`` is ``M = lim g(z)/z`` and is only required for convex
    payoffs priced on unbounded supports.
    """

    is_convex: bool
    asymptotic_slope: float | None = None
    pieces: tuple[tuple[float, float], ...] | None = None
    breakpoints: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    evaluator: Callable[[float], float] | None = field(default=None, compare=False)
    label: str = "custom"

    # constructors -----------------------------------------------------------

    @classmethod
    def max_affine(cls, pieces: Sequence[tuple[float, float]], label: str | None = None):
        pieces = tuple((a, b) for a, b in pieces)
        if not pieces:
            raise PayoffSpecError("max-affine payoff needs at least one piece")
        return cls(
            is_convex=True,
            asymptotic_slope=max(a for a, _ in pieces),
            pieces=pieces,
            label=label or "max_affine",
        )

    @classmethod
    def call(cls, strike):
        return cls.max_affine([(0, 0), (1, -strike)], label=f"call:{strike}")

    @classmethod
    def put(cls, strike):
        return cls.max_affine([(0, 0), (-1, strike)], label=f"put:{strike}")

    @classmethod
    def linear(cls, a, b):
        return cls.max_affine([(a, b)], label=f"linear:{a},{b}")

    @classmethod
    def zero(cls):
        return cls.max_affine([(0, 0)], label="zero")

    @classmethod
    def from_breakpoints(cls, xs: Sequence[float], ys: Sequence[float], label: str = "pwl"):
        xs = tuple(float(v) for v in xs)
        ys = tuple(float(v) for v in ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise PayoffSpecError("need at least two breakpoints of equal length")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise PayoffSpecError("breakpoints must be strictly increasing")
        slopes = [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])]
        convex = all(s1 >= s0 - 1e-12 for s0, s1 in zip(slopes, slopes[1:]))
        return cls(
            is_convex=convex,
            asymptotic_slope=slopes[-1],
            breakpoints=(xs, ys),
            label=label,
        )

    @classmethod
    def from_evaluator(cls, fn: Callable[[float], float], *, convex: bool, scale: float = 1.0,
                       slope: float | None = None, label: str = "custom"):
        """Wrap a callable; for convex payoffs without a known slope, estimate ``M``."""
        if convex and slope is None:
            slope = estimate_asymptotic_slope(fn, scale)
        return cls(is_convex=convex, asymptotic_slope=slope, evaluator=fn, label=label)

    # evaluation -------------------------------------------------------------

    def __call__(self, x):
        if self.pieces is not None:
            best = None
            for a, b in self.pieces:
                v = a * x + b
                if best is None or v > best:
                    best = v
            return best
        if self.breakpoints is not None:
            return float(self.evaluate(np.asarray([x], dtype=float))[0])
        return self.evaluator(x)

    def evaluate(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.pieces is not None:
            a = np.array([p[0] for p in self.pieces], dtype=float)
            b = np.array([p[1] for p in self.pieces], dtype=float)
            return np.max(np.multiply.outer(xs, a) + b, axis=-1)
        if self.breakpoints is not None:
            bx = np.array(self.breakpoints[0])
            by = np.array(self.breakpoints[1])
            out = np.interp(xs, bx, by)
            left = xs < bx[0]
            right = xs > bx[-1]
            s0 = (by[1] - by[0]) / (bx[1] - bx[0])
            s1 = (by[-1] - by[-2]) / (bx[-1] - bx[-2])
            out = np.where(left, by[0] + s0 * (xs - bx[0]), out)
            out = np.where(right, by[-1] + s1 * (xs - bx[-1]), out)
            return out
        return np.vectorize(self.evaluator, otypes=[float])(xs)

    def affine_arrays(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(slopes, intercepts) of the max-affine form, when the payoff has one."""
        if self.pieces is not None:
            return (np.array([p[0] for p in self.pieces], dtype=float),
                    np.array([p[1] for p in self.pieces], dtype=float))
        if self.breakpoints is not None and self.is_convex:
            xs, ys = self.breakpoints
            a = [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])]
            b = [y0 - s * x0 for s, x0, y0 in zip(a, xs, ys)]
            return np.array(a), np.array(b)
        return None

    def __str__(self) -> str:
        return self.label


def estimate_asymptotic_slope(fn: Callable[[float], float], scale: float = 1.0,
                              rtol: float = 1e-6) -> float:
    """Chord slopes of ``fn`` over ``[z, 2z]`` and ``[2z, 4z]`` with ``z = 1e6 * scale``.

    Accepted only if the two agree within ``rtol`` relative, i.e. ``fn`` is
    affine to that precision far out; the outer chord is returned.
    """
    z = 1e6 * max(abs(scale), 1.0)
    f1, f2, f4 = fn(z), fn(2 * z), fn(4 * z)
    near = (f2 - f1) / z
    far = (f4 - f2) / (2 * z)
    if not (math.isfinite(near) and math.isfinite(far)):
        raise PayoffSpecError("payoff slope does not converge to a finite value")
    if abs(far - near) > rtol * max(abs(near), abs(far), 1.0):
        raise PayoffSpecError(f"payoff slope does not settle: {near} vs {far}")
    return far


def parse_payoff(spec: str) -> PiecewisePayoff:
    """Parse ``call:K``, ``put:K``, ``linear:a,b`` or ``zero``."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "zero" and not arg:
            return PiecewisePayoff.zero()
        if kind == "call":
            return PiecewisePayoff.call(float(arg))
        if kind == "put":
            return PiecewisePayoff.put(float(arg))
        if kind == "linear":
            a, b = (float(v) for v in arg.split(","))
            return PiecewisePayoff.linear(a, b)
    except ValueError as exc:
        raise PayoffSpecError(f"bad payoff spec {spec!r}: {exc}") from None
    raise PayoffSpecError(f"unknown payoff spec {spec!r}")
