"""Super-hedging prices in the multiplicative interval model.

At step ``t`` the next price lies in ``[k_d[t] x, k_u[t] x]`` and only the
endpoints matter for a convex payoff, so

    h(t-1, x) = lam h(t, k_d x) + (1 - lam) h(t, k_u x),   lam = (k_u - 1)/(k_u - k_d)

with ``lam = 0`` when ``k_d = k_u = 1`` and, for ``k_u = inf``,
``h(t-1, x) = h(t, k_d x) + (1 - k_d) x M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from . import kernels
from .convex import INF, AIPViolation
from .payoffs import PayoffSpecError, PiecewisePayoff

MAX_GENERAL_STEPS = 25
MAX_GRID_STEPS = 20

TWO_BRANCH, INFINITE_UP, DEGENERATE = 0, 1, 2


class NonConvexPayoffError(PayoffSpecError):
    pass


@dataclass(frozen=True)
class IntervalModelParams:
    n: int
    k_d: tuple
    k_u: tuple
    S0: float
    dt: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "k_d", tuple(self.k_d))
        object.__setattr__(self, "k_u", tuple(self.k_u))
        if self.n < 0 or len(self.k_d) != self.n or len(self.k_u) != self.n:
            raise ValueError(f"need {self.n} multipliers per side, got {len(self.k_d)} and {len(self.k_u)}")
        if not self.S0 > 0:
            raise ValueError("S0 must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", 1.0 / self.n if self.n else 1.0)
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        for v in self.k_d + self.k_u:
            if isinstance(v, float) and math.isnan(v):
                raise ValueError("multipliers must not be NaN")

    @classmethod
    def homogeneous(cls, n: int, k_d, k_u, S0, dt: float | None = None) -> "IntervalModelParams":
        return cls(n, (k_d,) * n, (k_u,) * n, S0, dt)

    @classmethod
    def symmetric(cls, sigma, S0, n: int, T: float = 1.0) -> "IntervalModelParams":
        """``k = 1 -/+ sigma sqrt(dt)`` with ``dt = T / n``; ``sigma`` scalar or per step."""
        dt = T / n
        sig = [sigma] * n if np.isscalar(sigma) else list(sigma)
        h = [s * math.sqrt(dt) for s in sig]
        return cls(n, tuple(1.0 - v for v in h), tuple(1.0 + v for v in h), S0, dt)

    def aip_violation(self) -> int | None:
        """First step whose multipliers break ``k_d <= 1 <= k_u``, else ``None``."""
        for t, (d, u) in enumerate(zip(self.k_d, self.k_u)):
            if not (0 <= d <= 1 <= u):
                return t
        return None

    @property
    def recombining(self) -> bool:
        return (len(set(self.k_d)) <= 1 and len(set(self.k_u)) <= 1
                and all(math.isfinite(u) for u in self.k_u))


@dataclass(frozen=True)
class LambdaWeights:
    lambda_: float
    one_minus_lambda: float
    infinite_upper: bool = False
    # k_d = k_u = 1; k_u = 1 > k_d also has lambda = 0 but still needs a chord hedge
    degenerate: bool = False

    @property
    def kind(self) -> int:
        if self.infinite_upper:
            return INFINITE_UP
        return DEGENERATE if self.degenerate else TWO_BRANCH


def lambda_weights(k_d, k_u) -> LambdaWeights:
    if k_d > 1 or k_u < 1 or k_d < 0:
        raise AIPViolation(f"multipliers ({k_d}, {k_u}) violate k_d <= 1 <= k_u")
    if k_u == INF:
        return LambdaWeights(1, 0, True)
    if k_u == k_d:
        return LambdaWeights(0, 1, degenerate=True)
    # 1 - lambda computed directly keeps both weights exact for rationals
    return LambdaWeights((k_u - 1) / (k_u - k_d), (1 - k_d) / (k_u - k_d))


def _check_payoff(payoff: PiecewisePayoff) -> float:
    if not isinstance(payoff, PiecewisePayoff) or not payoff.is_convex:
        raise NonConvexPayoffError("the interval scheme needs a convex payoff; price other claims on a tree")
    M = payoff.asymptotic_slope
    if M is None or not math.isfinite(M):
        raise PayoffSpecError("convex payoff needs a finite asymptotic slope")
    probes = [0.0]
    arrays = payoff.affine_arrays()
    if arrays is not None:
        a, b = arrays
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = -(b[:, None] - b[None, :]) / (a[:, None] - a[None, :])
        probes.extend(float(z) for z in cross[np.isfinite(cross)] if z > 0)
    if min(float(payoff(z)) for z in probes) < -1e-12 or M < 0:
        raise PayoffSpecError("payoff must be non-negative on [0, inf)")
    return float(M)


class ValueLattice:
    """The functions ``h(t, .)`` of the recursion and their hedge ratios.

    ``value`` and ``theta`` accept any ``x >= 0``. Grids of node abscissae are
    materialized for recombining models and for general models with at most
    ``MAX_GRID_STEPS`` steps.
    """

    def __init__(self, params: IntervalModelParams, payoff: PiecewisePayoff):
        self.params = params
        self.payoff = payoff
        self.M = _check_payoff(payoff)
        t = params.aip_violation()
        if t is not None:
            raise AIPViolation(f"step {t}: k_d={params.k_d[t]}, k_u={params.k_u[t]} violate k_d <= 1 <= k_u")
        if not params.recombining and params.n > MAX_GENERAL_STEPS:
            raise ValueError(f"time-inhomogeneous models are limited to {MAX_GENERAL_STEPS} steps")
        self.weights = [lambda_weights(d, u) for d, u in zip(params.k_d, params.k_u)]
        self._kd = np.array(params.k_d, dtype=float)
        self._ku = np.array(params.k_u, dtype=float)
        self._lam = np.array([w.lambda_ for w in self.weights], dtype=float)
        self._oml = np.array([w.one_minus_lambda for w in self.weights], dtype=float)
        self._kind = np.array([w.kind for w in self.weights], dtype=np.int64)
        self._affine = payoff.affine_arrays()
        self._grids: list[np.ndarray] | None = None
        self._values: list[np.ndarray] | None = None
        self._children: list[tuple[np.ndarray, np.ndarray]] | None = None
        if params.recombining:
            self._build_recombining()
        elif params.n <= MAX_GRID_STEPS:
            self._build_word_tree()

    @property
    def n(self) -> int:
        return self.params.n

    # construction ---------------------------------------------------------

    def _build_recombining(self) -> None:
        p, n = self.params, self.params.n
        kd = p.k_d[0] if n else 1.0
        ku = p.k_u[0] if n else 1.0
        if n and self._kind[0] == DEGENERATE:
            self._grids = [np.array([p.S0])] * (n + 1)
            g = float(self.payoff(p.S0))
            self._values = [np.array([g])] * (n + 1)
            self._children = [(np.array([0]), np.array([0]))] * n
            return
        grids = [p.S0 * kd ** (t - np.arange(t + 1)) * ku ** np.arange(t + 1) for t in range(n + 1)]
        H = kernels.rollback_recombining(self.payoff.evaluate(grids[n]), self._lam, self._oml)
        self._grids = grids
        self._values = [H[t, : t + 1].copy() for t in range(n + 1)]
        self._children = [(np.arange(t + 1), np.arange(1, t + 2)) for t in range(n)]

    def _build_word_tree(self) -> None:
        """Non-recombining node tree: two children per branching step, one otherwise."""
        n = self.n
        grids = [np.array([self.params.S0], dtype=float)]
        children = []
        for s in range(n):
            xs = grids[-1]
            idx = np.arange(xs.size)
            if self._kind[s] == TWO_BRANCH:
                grids.append(np.stack([self._kd[s] * xs, self._ku[s] * xs], axis=1).ravel())
                children.append((2 * idx, 2 * idx + 1))
            else:
                grids.append(xs * (self._kd[s] if self._kind[s] == INFINITE_UP else 1.0))
                children.append((idx, idx))
        values = [None] * (n + 1)
        values[n] = self.payoff.evaluate(grids[n])
        for s in range(n - 1, -1, -1):
            lo, hi = children[s]
            if self._kind[s] == TWO_BRANCH:
                values[s] = self._lam[s] * values[s + 1][lo] + self._oml[s] * values[s + 1][hi]
            elif self._kind[s] == INFINITE_UP:
                values[s] = values[s + 1][lo] + (1.0 - self._kd[s]) * grids[s] * self.M
            else:
                values[s] = values[s + 1][lo].copy()
        self._grids, self._values, self._children = grids, values, children

    # point evaluation ------------------------------------------------------

    def value(self, t: int, x: float) -> float:
        """``h(t, x)``."""
        if not 0 <= t <= self.n:
            raise ValueError(f"t must lie in [0, {self.n}]")
        x = float(x)
        if t == self.n:
            return float(self.payoff(x))
        if self.params.recombining:
            m = self.n - t
            kd, ku = self._kd[0], self._ku[0]
            if self._kind[0] == DEGENERATE:
                return float(self.payoff(x))
            j = np.arange(m + 1)
            terminal = self.payoff.evaluate(x * kd ** (m - j) * ku ** j)
            return float(kernels.rollback_recombining(terminal, self._lam[t:].copy(),
                                                      self._oml[t:].copy())[0, 0])
        if self._affine is not None:
            a, b = self._affine
            return kernels.eval_point(x, t, self._kd, self._ku, self._lam, self._oml,
                                      self._kind, self.M, a, b)
        return self._value_generic(t, x)

    def _value_generic(self, t: int, x: float) -> float:
        if t == self.n:
            return float(self.payoff(x))
        k = self._kind[t]
        if k == TWO_BRANCH:
            return (self._lam[t] * self._value_generic(t + 1, self._kd[t] * x)
                    + self._oml[t] * self._value_generic(t + 1, self._ku[t] * x))
        if k == INFINITE_UP:
            return self._value_generic(t + 1, self._kd[t] * x) + (1.0 - self._kd[t]) * x * self.M
        return self._value_generic(t + 1, x)

    def theta(self, t: int, x: float) -> float:
        """Hedge ratio held over ``(t, t+1]`` at price ``x``: the chord slope of ``h(t+1, .)``."""
        if not 0 <= t < self.n:
            raise ValueError(f"t must lie in [0, {self.n - 1}]")
        k = self._kind[t]
        if k == INFINITE_UP:
            return float(self.M)
        if k == DEGENERATE or x == 0:
            return 0.0
        kd, ku = self._kd[t], self._ku[t]
        return float((self.value(t + 1, ku * x) - self.value(t + 1, kd * x)) / ((ku - kd) * x))

    @property
    def root_value(self) -> float:
        if self._values is not None:
            return float(self._values[0][0])
        return self.value(0, self.params.S0)

    # grids ---------------------------------------------------------------------

    @property
    def has_grid(self) -> bool:
        return self._grids is not None

    def _need_grid(self) -> None:
        if self._grids is None:
            raise ValueError(f"grids are only materialized up to {MAX_GRID_STEPS} inhomogeneous steps")

    def grid(self, t: int) -> np.ndarray:
        self._need_grid()
        return self._grids[t]

    def values(self, t: int) -> np.ndarray:
        self._need_grid()
        return self._values[t]

    def thetas(self, t: int) -> np.ndarray:
        """Hedge ratios at the grid nodes of step ``t`` (``t < n``)."""
        self._need_grid()
        k = self._kind[t]
        xs = self._grids[t]
        if k == INFINITE_UP:
            return np.full(xs.shape, self.M)
        if k == DEGENERATE:
            return np.zeros(xs.shape)
        lo, hi = self._children[t]
        nxt = self._values[t + 1]
        den = (self._ku[t] - self._kd[t]) * xs
        with np.errstate(divide="ignore", invalid="ignore"):
            th = (nxt[hi] - nxt[lo]) / den
        return np.where(xs == 0, 0.0, th)

    def to_tsv(self) -> str:
        self._need_grid()
        lines = ["t\tx\th\ttheta"]
        for t in range(self.n + 1):
            th = self.thetas(t) if t < self.n else np.full(self._grids[t].shape, np.nan)
            for x, h, d in zip(self._grids[t], self._values[t], th):
                lines.append(f"{t}\t{float(x)!r}\t{float(h)!r}\t{'' if math.isnan(d) else repr(float(d))}")
        return "\n".join(lines) + "\n"

    def slope_at(self, t: int, z: float) -> float:
        """Chord slope ``(h(t, 2z) - h(t, z)) / z``, a proxy for ``lim h(t, z)/z``."""
        return (self.value(t, 2 * z) - self.value(t, z)) / z


def price_recursive(params: IntervalModelParams, payoff: PiecewisePayoff) -> ValueLattice:
    return ValueLattice(params, payoff)


def hedge_ratio(t: int, x: float, params: IntervalModelParams, lattice: ValueLattice | None = None) -> float:
    if lattice is None:
        raise ValueError("a lattice priced from the same params is required")
    if lattice.params != params:
        raise ValueError("lattice was priced with different parameters")
    return lattice.theta(t, x)


def price_exact(params: IntervalModelParams, payoff: PiecewisePayoff) -> Fraction:
    """Root price in rational arithmetic (every float input converted exactly)."""
    M = Fraction(_check_payoff(payoff))
    if payoff.pieces is None:
        raise NonConvexPayoffError("exact pricing needs a max-affine payoff")
    if params.aip_violation() is not None:
        raise AIPViolation(f"step {params.aip_violation()} violates k_d <= 1 <= k_u")
    pieces = [(Fraction(a), Fraction(b)) for a, b in payoff.pieces]
    steps = []
    for d, u in zip(params.k_d, params.k_u):
        fd = Fraction(d)
        fu = INF if u == INF else Fraction(u)
        steps.append((fd, fu, lambda_weights(fd, fu)))
    memo: dict[tuple[int, Fraction], Fraction] = {}

    def h(t: int, x: Fraction) -> Fraction:
        key = (t, x)
        if key in memo:
            return memo[key]
        if t == params.n:
            out = max(a * x + b for a, b in pieces)
        else:
            d, u, w = steps[t]
            if w.infinite_upper:
                out = h(t + 1, d * x) + (1 - d) * x * M
            elif w.lambda_ == 0:
                out = h(t + 1, x)
            else:
                out = w.lambda_ * h(t + 1, d * x) + w.one_minus_lambda * h(t + 1, u * x)
        memo[key] = out
        return out

    return h(0, Fraction(params.S0))


def bs_reference_price(S0: float, K: float, T: float, sigma) -> float:
    """Zero-rate Black-Scholes call with total variance ``int_0^T sigma(t)^2 dt``.

    ``sigma`` is a constant, a list of per-step values on an even grid of
    ``[0, T]``, or a callable of time.
    """
    if callable(sigma):
        var, _ = integrate.quad(lambda s: sigma(s) ** 2, 0.0, T)
    elif np.isscalar(sigma):
        var = float(sigma) ** 2 * T
    else:
        sig = np.asarray(sigma, dtype=float)
        var = float(np.sum(sig ** 2) * T / sig.size)
    if K <= 0:
        return S0 - K
    if var <= 0:
        return max(S0 - K, 0.0)
    sd = math.sqrt(var)
    d1 = (math.log(S0 / K) + 0.5 * var) / sd
    return float(S0 * special.ndtr(d1) - K * special.ndtr(d1 - sd))
