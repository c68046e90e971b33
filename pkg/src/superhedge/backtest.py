"""Rolling out-of-sample evaluation of the interval-model super-hedge."""

from __future__ import annotations

import datetime as dt_
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Sequence

import numpy as np

from . import calibration as cal
from .interval import IntervalModelParams, ValueLattice, price_recursive
from .payoffs import PiecewisePayoff

# an error above -NEG_TOL is rounding noise on an exact replication, not a loss
NEG_TOL = 1e-9


@dataclass(frozen=True)
class Trade:
    t: int
    S: float
    theta: float
    V: float


@dataclass(frozen=True)
class EpisodeResult:
    V0: float
    V_T: float
    epsilon: float
    ratio_V0_S0: float
    trades: tuple[Trade, ...]
    covered: bool = True
    key: str = ""
    strike: float | None = None
    clamped: bool = False

    @property
    def S0(self) -> float:
        return self.trades[0].S


def run_episode(prices: Sequence, params: IntervalModelParams | ValueLattice,
                payoff: PiecewisePayoff, key: str = "") -> EpisodeResult:
    """Price at the first close, rebalance to the hedge ratio at each close, settle at the last.

    ``covered`` is false when a realized ratio left ``[k_d[t], k_u[t]]``; the
    portfolio is still marked to market along the realized path.
    """
    lattice = params if isinstance(params, ValueLattice) else price_recursive(params, payoff)
    p = lattice.params
    S = [float(v) for v in prices]
    if len(S) != p.n + 1:
        raise ValueError(f"episode has {len(S)} closes, model needs {p.n + 1}")
    V0 = lattice.value(0, S[0])
    thetas = [lattice.theta(t, S[t]) for t in range(p.n)]
    gains = [th * (b - a) for th, a, b in zip(thetas, S, S[1:])]
    trades = []
    V = V0
    for t in range(p.n):
        trades.append(Trade(t, S[t], thetas[t], V))
        V += gains[t]
    V_T = V0 + math.fsum(gains)
    trades.append(Trade(p.n, S[-1], 0.0, V_T))
    ratios = cal.exact_ratios(prices)
    covered = all(d <= float(r) <= u for r, d, u in zip(ratios, p.k_d, p.k_u))
    return EpisodeResult(V0, V_T, V_T - float(payoff(S[-1])), V0 / S[0], tuple(trades), covered,
                         key, strike_of(payoff))


def strike_of(payoff: PiecewisePayoff) -> float | None:
    kind, _, arg = payoff.label.partition(":")
    return float(arg) if kind in ("call", "put") else None


# ---------------------------------------------------------------------------
# statistics

def var_95(samples: Sequence[float]) -> float:
    """The ``ceil(0.05 N)``-th smallest sample, sign kept."""
    xs = sorted(samples)
    if not xs:
        raise ValueError("VaR of an empty sample")
    return xs[-(-len(xs) // 20) - 1]


def _mean_std(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))


@dataclass(frozen=True)
class BacktestResult:
    episodes: tuple[EpisodeResult, ...]
    mean_eps: float
    std_eps: float
    p_neg: float
    var95: float
    mean_ratio: float
    std_ratio: float
    settings: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_episodes(cls, episodes: Sequence[EpisodeResult], settings: dict | None = None):
        episodes = tuple(episodes)
        if not episodes:
            raise cal.InsufficientDataError("no episodes to summarize")
        eps = [e.epsilon for e in episodes]
        ratio = [e.ratio_V0_S0 for e in episodes]
        m_eps, s_eps = _mean_std(eps)
        m_r, s_r = _mean_std(ratio)
        p_neg = sum(1 for x in eps if x < -NEG_TOL) / len(eps)
        return cls(episodes, m_eps, s_eps, p_neg, var_95(eps), m_r, s_r, dict(settings or {}))

    @property
    def n_uncovered(self) -> int:
        return sum(1 for e in self.episodes if not e.covered)

    def summary_lines(self) -> list[str]:
        out = [f"{k}: {v}" for k, v in self.settings.items()]
        out += [
            f"episodes: {len(self.episodes)}",
            f"mean_eps: {self.mean_eps:.10g}",
            f"std_eps: {self.std_eps:.10g}",
            f"p_neg: {self.p_neg:.10g}",
            f"var95: {self.var95:.10g}",
            f"mean_V0_S0: {self.mean_ratio:.10g}",
            f"std_V0_S0: {self.std_ratio:.10g}",
            f"uncovered_episodes: {self.n_uncovered}",
            f"clamped_estimates: {sum(1 for e in self.episodes if e.clamped)}",
        ]
        return out

    def episodes_tsv(self) -> str:
        lines = ["key\tS0\tK\tV0\tV_T\tepsilon\tV0_S0\tcovered\tclamped"]
        for e in self.episodes:
            k = "" if e.strike is None else repr(e.strike)
            lines.append(f"{e.key}\t{e.S0!r}\t{k}\t{e.V0!r}\t{e.V_T!r}\t{e.epsilon!r}\t"
                         f"{e.ratio_V0_S0!r}\t{int(e.covered)}\t{int(e.clamped)}")
        return "\n".join(lines) + "\n"

    def histogram_tsv(self, bins: int = 20) -> str:
        counts, edges = np.histogram([e.epsilon for e in self.episodes], bins=bins)
        lines = ["lo\thi\tcount"]
        lines += [f"{lo!r}\t{hi!r}\t{c}" for lo, hi, c in zip(edges[:-1].tolist(), edges[1:].tolist(), counts)]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# rolling backtest

@dataclass(frozen=True)
class RollingConfig:
    window: int = 52
    n: int = 4
    estimator: str = "symmetric"
    strike: float | None = None
    option: str = "call"
    dt: float | None = None
    pooled: bool = False
    mode: str = "week"


def _payoff(option: str, K: float) -> PiecewisePayoff:
    if option == "call":
        return PiecewisePayoff.call(K)
    if option == "put":
        return PiecewisePayoff.put(K)
    raise ValueError(f"unknown option type {option!r}")


def _one(window: list[cal.Episode], nxt: cal.Episode, cfg: RollingConfig) -> EpisodeResult:
    est = cal.estimate(window, cfg.estimator, cfg.dt, cfg.pooled, window=nxt.key)
    S0 = float(nxt.closes[0])
    K = S0 if cfg.strike is None else cfg.strike
    payoff = _payoff(cfg.option, K)
    res = run_episode(nxt.closes, est.params(S0, cfg.n), payoff, key=nxt.key)
    return EpisodeResult(res.V0, res.V_T, res.epsilon, res.ratio_V0_S0, res.trades, res.covered,
                         res.key, K, est.aip_flag)


def _run_block(block):
    cfg, pairs = block
    return [_one(w, e, cfg) for w, e in pairs]


def run_rolling(series, cfg: RollingConfig = RollingConfig(), jobs: int = 1) -> BacktestResult:
    """Estimate on the trailing ``cfg.window`` episodes, hedge the next one, repeat.

    ``cfg.strike = None`` means at the money (strike = first close of the
    episode). Results are merged in episode order whatever ``jobs`` is.
    """
    eps = series if not isinstance(series, cal.PriceSeries) else cal.episodes(series, cfg.n, cfg.mode)
    pairs = list(cal.rolling_windows(eps, cfg.window))
    if jobs <= 1 or len(pairs) < 2:
        results = _run_block((cfg, pairs))
    else:
        size = -(-len(pairs) // jobs)
        blocks = [(cfg, pairs[i:i + size]) for i in range(0, len(pairs), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [r for chunk in pool.map(_run_block, blocks) for r in chunk]
    settings = {
        "estimator": cfg.estimator,
        "window": cfg.window,
        "steps": cfg.n,
        "strike": "atm" if cfg.strike is None else cfg.strike,
        "option": cfg.option,
    }
    return BacktestResult.from_episodes(results, settings)


def synthetic_series(rng: np.random.Generator, weeks: int, k_d: Sequence[float], k_u: Sequence[float],
                     S0: float = 100.0, start: dt_.date = dt_.date(2021, 1, 4),
                     extreme_every: int = 4) -> cal.PriceSeries:
    """Daily closes, Monday to Friday, whose intra-week ratios stay inside ``[k_d, k_u]``.

    Every ``extreme_every``-th week moves by ``k_u`` at each step and the
    following week by ``k_d``, so any window of at least ``2 * extreme_every``
    weeks recovers the bounds exactly. Closes are exact decimals.
    """
    start = start - dt_.timedelta(days=start.weekday())
    dates, closes = [], []
    s = Decimal(str(S0))
    for w in range(weeks):
        monday = start + dt_.timedelta(weeks=w)
        if w % extreme_every == 0:
            rs = list(k_u)
        elif w % extreme_every == 1:
            rs = list(k_d)
        else:
            rs = [float(rng.uniform(d, u)) for d, u in zip(k_d, k_u)]
        week = [s]
        for r in rs:
            week.append(week[-1] * Decimal(repr(r)))
        for i, c in enumerate(week):
            dates.append(monday + dt_.timedelta(days=i))
            closes.append(c)
        s = week[-1] * Decimal(repr(float(rng.uniform(0.98, 1.02))))
    return cal.PriceSeries(dates, closes)
