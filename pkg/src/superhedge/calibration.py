"""Multiplier estimation from historical closes.

Ratios ``S_{t+1}/S_t`` are formed exactly (``Fraction``) from the raw closes
and rounded once, so estimates depend on the closes only through their
ratios: rescaling a series of decimal closes leaves every estimate
bit-identical.
"""

from __future__ import annotations

import csv
import datetime as dt_
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .interval import IntervalModelParams


class DataFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple[dt_.date, ...]
    closes: tuple
    frequency: str = "daily"

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", tuple(self.closes))
        if len(self.dates) != len(self.closes):
            raise ValueError("dates and closes differ in length")
        if len(self.closes) < 2:
            raise InsufficientDataError("a price series needs at least two observations")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("timestamps must be strictly increasing")
        for c in self.closes:
            _check_close(c)

    def __len__(self) -> int:
        return len(self.closes)

    def scaled(self, c) -> "PriceSeries":
        return PriceSeries(self.dates, tuple(v * c for v in self.closes), self.frequency)


def _check_close(c) -> None:
    if isinstance(c, Decimal):
        ok = c.is_finite() and c > 0
    else:
        ok = math.isfinite(c) and c > 0
    if not ok:
        raise ValueError(f"close {c!r} must be finite and positive")


def read_csv(path) -> PriceSeries:
    """Read ``date,close`` rows; closes are kept as ``Decimal``."""
    dates, closes = [], []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "close"]:
            raise DataFormatError("header must be 'date,close'", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 2:
                raise DataFormatError(f"expected 2 fields, got {len(row)}", line)
            try:
                day = dt_.date.fromisoformat(row[0].strip())
            except ValueError:
                raise DataFormatError(f"bad ISO date {row[0]!r}", line) from None
            try:
                close = Decimal(row[1].strip())
            except InvalidOperation:
                raise DataFormatError(f"bad close {row[1]!r}", line) from None
            if not close.is_finite() or close <= 0:
                raise DataFormatError(f"close must be finite and positive, got {row[1].strip()}", line)
            if dates and day <= dates[-1]:
                raise DataFormatError(f"date {day} does not increase", line)
            dates.append(day)
            closes.append(close)
    return PriceSeries(dates, closes)


def write_csv(series: PriceSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "close"])
        for d, c in zip(series.dates, series.closes):
            w.writerow([d.isoformat(), str(c)])


def exact_ratios(closes: Sequence) -> list[Fraction]:
    fr = [Fraction(c) for c in closes]
    if any(c <= 0 for c in fr):
        raise ValueError("closes must be positive")
    return [b / a for a, b in zip(fr, fr[1:])]


# ---------------------------------------------------------------------------
# episodes and windows

@dataclass(frozen=True)
class Episode:
    key: str
    dates: tuple[dt_.date, ...]
    closes: tuple

    @property
    def steps(self) -> int:
        return len(self.closes) - 1


def episodes(series: PriceSeries, n: int = 4, mode: str = "week") -> list[Episode]:
    """Split a daily series into hedging episodes of ``n + 1`` closes.

    ``week`` groups by ISO week and drops weeks without exactly ``n + 1``
    closes (holidays); ``chunk`` cuts consecutive disjoint blocks.
    """
    out = []
    if mode == "week":
        groups: dict[tuple[int, int], list[int]] = {}
        for i, d in enumerate(series.dates):
            iso = d.isocalendar()
            groups.setdefault((iso[0], iso[1]), []).append(i)
        for (year, week), idx in groups.items():
            if len(idx) == n + 1:
                out.append(Episode(f"{year}-W{week:02d}", tuple(series.dates[i] for i in idx),
                                   tuple(series.closes[i] for i in idx)))
    elif mode == "chunk":
        for s in range(0, len(series) - n, n + 1):
            out.append(Episode(series.dates[s].isoformat(), series.dates[s:s + n + 1],
                               series.closes[s:s + n + 1]))
    else:
        raise ValueError(f"unknown episode mode {mode!r}")
    return out


def _as_episodes(source) -> tuple[list[Sequence], bool]:
    """Normalize input to a list of close sequences; flag flat (pooled) input."""
    if isinstance(source, PriceSeries):
        return [source.closes], True
    items = list(source)
    if not items:
        raise InsufficientDataError("no observations")
    if isinstance(items[0], Episode):
        return [e.closes for e in items], False
    if isinstance(items[0], (Sequence, np.ndarray)) and not isinstance(items[0], str):
        return [tuple(e) for e in items], False
    return [tuple(items)], True


def _step_ratios(source) -> tuple[list[list[Fraction]], bool]:
    eps, flat = _as_episodes(source)
    if flat:
        r = exact_ratios(eps[0])
        if not r:
            raise InsufficientDataError("need at least two closes")
        return [r], True
    n = len(eps[0]) - 1
    if n < 1 or any(len(e) != n + 1 for e in eps):
        raise InsufficientDataError("episodes must share a length of at least two closes")
    per_step: list[list[Fraction]] = [[] for _ in range(n)]
    for e in eps:
        for i, r in enumerate(exact_ratios(e)):
            per_step[i].append(r)
    return per_step, False


# ---------------------------------------------------------------------------
# estimators

@dataclass(frozen=True)
class Estimate:
    """Per-step multipliers; ``sigma``/``half_width`` only for the symmetric estimator."""

    kind: str
    k_d: tuple[float, ...]
    k_u: tuple[float, ...]
    dt: float
    sigma: tuple[float, ...] | None = None
    half_width: tuple[float, ...] | None = None
    clamped: tuple[bool, ...] = ()
    window: str = ""

    @property
    def aip_flag(self) -> bool:
        """True when the raw data violated ``k_d <= 1 <= k_u`` and bounds were clamped."""
        return any(self.clamped)

    @property
    def steps(self) -> int:
        return len(self.k_d)

    def params(self, S0: float, n: int | None = None) -> IntervalModelParams:
        """Model on ``n`` steps; a pooled (single-step) estimate is repeated."""
        n = self.steps if n is None else n
        if self.steps not in (1, n):
            raise ValueError(f"estimate has {self.steps} steps, model needs {n}")
        kd = self.k_d * n if self.steps == 1 else self.k_d
        ku = self.k_u * n if self.steps == 1 else self.k_u
        return IntervalModelParams(n, kd, ku, float(S0), self.dt)


def _pool(per_step: list[list[Fraction]], pooled: bool) -> list[list[Fraction]]:
    return [[r for rs in per_step for r in rs]] if pooled else per_step


def symmetric_estimate(source, dt: float | None = None, pooled: bool = False,
                       window: str = "") -> Estimate:
    """``sigma = max |r - 1| / sqrt(dt)`` per intra-episode step index.

    ``source`` is a :class:`PriceSeries` or flat close sequence (one pooled
    estimate) or a list of equal-length episodes.
    """
    per_step, flat = _step_ratios(source)
    per_step = _pool(per_step, pooled or flat)
    if dt is None:
        dt = 1.0 / len(per_step)
    root = math.sqrt(dt)
    dev = [max(abs(r - 1) for r in rs) for rs in per_step]
    half = tuple(float(m) for m in dev)
    sigma = tuple(h / root for h in half)
    # bounds rounded from the exact 1 -/+ m, so they dominate min/max ratios exactly
    k_u = tuple(float(1 + m) for m in dev)
    k_d = tuple(max(0.0, float(1 - m)) for m in dev)
    clamped = tuple(m > 1 for m in dev)
    return Estimate("symmetric", k_d, k_u, dt, sigma, half, clamped, window)


def asymmetric_estimate(source, dt: float | None = None, pooled: bool = False,
                        window: str = "") -> Estimate:
    """``k_d = min r``, ``k_u = max r`` per step index, clamped to ``k_d <= 1 <= k_u``."""
    per_step, flat = _step_ratios(source)
    per_step = _pool(per_step, pooled or flat)
    if dt is None:
        dt = 1.0 / len(per_step)
    lo = [float(min(rs)) for rs in per_step]
    hi = [float(max(rs)) for rs in per_step]
    clamped = tuple(a > 1.0 or b < 1.0 for a, b in zip(lo, hi))
    return Estimate("asymmetric", tuple(min(a, 1.0) for a in lo), tuple(max(b, 1.0) for b in hi),
                    dt, None, None, clamped, window)


def estimate(source, kind: str, dt: float | None = None, pooled: bool = False,
             window: str = "") -> Estimate:
    if kind == "symmetric":
        return symmetric_estimate(source, dt, pooled, window)
    if kind == "asymmetric":
        return asymmetric_estimate(source, dt, pooled, window)
    raise ValueError(f"unknown estimator {kind!r}")


def coverage_ratio(source, sigma, dt: float | None = None) -> float:
    """Fraction of observed steps with ``|r - 1| / sqrt(dt) <= sigma_t``.

    ``sigma`` is a scalar, a per-step sequence, or a symmetric
    :class:`Estimate` (whose ``dt`` is then used).
    """
    if isinstance(sigma, Estimate):
        if sigma.sigma is None:
            raise ValueError("coverage_ratio needs a symmetric estimate; use bounds_coverage")
        dt = sigma.dt if dt is None else dt
        sigma = sigma.sigma
    per_step, flat = _step_ratios(source)
    sig = [sigma] if np.isscalar(sigma) else list(sigma)
    if dt is None:
        dt = 1.0 / (1 if flat else len(per_step))
    root = math.sqrt(dt)
    hits = total = 0
    for i, rs in enumerate(per_step):
        s = sig[0] if len(sig) == 1 else sig[i]
        for r in rs:
            total += 1
            hits += float(abs(r - 1)) / root <= s
    return hits / total


def bounds_coverage(source, k_d: Sequence[float], k_u: Sequence[float]) -> float:
    """Fraction of steps whose ratio lies in ``[k_d[t], k_u[t]]``."""
    per_step, _ = _step_ratios(source)
    hits = total = 0
    for i, rs in enumerate(per_step):
        lo = k_d[0] if len(k_d) == 1 else k_d[i]
        hi = k_u[0] if len(k_u) == 1 else k_u[i]
        for r in rs:
            total += 1
            hits += lo <= float(r) <= hi
    return hits / total


def rolling_windows(eps: Sequence[Episode], W: int) -> Iterable[tuple[list[Episode], Episode]]:
    """Trailing ``W`` episodes paired with the next one."""
    if W < 1:
        raise ValueError("window length must be positive")
    if len(eps) <= W:
        raise InsufficientDataError(f"need more than {W} episodes, have {len(eps)}")
    for i in range(W, len(eps)):
        yield list(eps[i - W:i]), eps[i]
