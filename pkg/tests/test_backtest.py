import datetime as dt
import math
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_convex_payoff, random_interval_params
from superhedge.backtest import (
    BacktestResult,
    RollingConfig,
    run_episode,
    run_rolling,
    synthetic_series,
    var_95,
)
from superhedge.calibration import InsufficientDataError, PriceSeries, episodes
from superhedge.interval import IntervalModelParams, price_recursive
from superhedge.payoffs import PiecewisePayoff

call100 = PiecewisePayoff.call(100)
two_step = IntervalModelParams.homogeneous(2, 0.5, 2.0, 100.0)


class TestEpisode:
    def test_flat_path(self):
        r = run_episode([100, 100, 100], two_step, call100)
        assert r.V0 == pytest.approx(100 / 3)
        assert [t.theta for t in r.trades[:-1]] == pytest.approx([2 / 3, 2 / 3])
        assert r.epsilon == pytest.approx(100 / 3) and r.covered

    @pytest.mark.parametrize("path", [[100, 200, 100], [100, 50, 100], [100, 200, 400], [100, 50, 25]])
    def test_on_lattice_replicates(self, path):
        assert abs(run_episode(path, two_step, call100).epsilon) < 1e-12

    def test_zero_payoff(self):
        r = run_episode([100, 140, 90], two_step, PiecewisePayoff.zero())
        assert (r.V0, r.V_T, r.epsilon) == (0, 0, 0)
        assert all(t.theta == 0 for t in r.trades)

    def test_out_of_bounds_is_flagged(self):
        r = run_episode([100, 300, 300], two_step, call100)
        assert not r.covered
        assert r.V_T == pytest.approx(100 / 3 + 2 / 3 * 200)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            run_episode([100, 100], two_step, call100)

    def test_accepts_lattice(self):
        lat = price_recursive(two_step, call100)
        assert run_episode([100, 80, 120], lat, call100) == run_episode([100, 80, 120], two_step, call100)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_self_financing_and_super_hedge(self, seed):
        rng = np.random.default_rng(seed)
        p = random_interval_params(rng)
        g = random_convex_payoff(rng)
        lat = price_recursive(p, g)
        S = [p.S0]
        for t in range(p.n):
            S.append(S[-1] * rng.uniform(p.k_d[t], p.k_u[t]))
        r = run_episode(S, lat, g)
        gains = math.fsum(tr.theta * (b - a) for tr, a, b in zip(r.trades, S, S[1:]))
        assert r.V_T == pytest.approx(r.V0 + gains, rel=1e-12, abs=1e-12)
        assert r.trades[-1].V == r.V_T
        assert r.epsilon >= -1e-9


class TestStatistics:
    def test_var_examples(self):
        assert var_95(list(range(-10, 100, 5))) == -5
        assert var_95([3.5] * 7) == 3.5
        assert var_95([-2.0]) == -2.0
        with pytest.raises(ValueError):
            var_95([])

    def test_summary_recomputable(self):
        eps = [run_episode(p, two_step, call100) for p in ([100, 100, 100], [100, 200, 100], [100, 300, 10])]
        res = BacktestResult.from_episodes(eps)
        xs = [e.epsilon for e in eps]
        assert res.mean_eps == pytest.approx(np.mean(xs))
        assert res.std_eps == pytest.approx(np.std(xs, ddof=1))
        assert res.p_neg == pytest.approx(1 / 3)
        assert res.n_uncovered == 1
        assert res.var95 == min(xs)

    def test_reports(self):
        eps = [run_episode([100, 100, 100], two_step, call100)] * 2
        res = BacktestResult.from_episodes(eps, {"estimator": "symmetric"})
        lines = res.summary_lines()
        assert lines[0] == "estimator: symmetric" and "p_neg: 0" in lines
        assert all(": " in ln for ln in lines)
        rows = res.episodes_tsv().splitlines()
        assert len(rows) == 3 and rows[1].split("\t")[1:3] == ["100.0", "100.0"]
        hist = res.histogram_tsv(4).splitlines()
        assert hist[0] == "lo\thi\tcount" and sum(int(r.split("\t")[2]) for r in hist[1:]) == 2

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            BacktestResult.from_episodes([])


class TestRolling:
    kd, ku = (0.97, 0.98, 0.96, 0.99), (1.03, 1.02, 1.05, 1.01)

    def series(self, seed=1, weeks=30):
        return synthetic_series(np.random.default_rng(seed), weeks, self.kd, self.ku)

    @pytest.mark.parametrize("estimator", ["symmetric", "asymmetric"])
    def test_in_bounds_series_never_loses(self, estimator):
        res = run_rolling(self.series(), RollingConfig(window=8, estimator=estimator))
        assert len(res.episodes) == 22
        assert res.p_neg == 0 and res.n_uncovered == 0
        assert min(e.epsilon for e in res.episodes) >= -1e-9

    def test_asymmetric_is_cheaper(self):
        s = self.series()
        sym = run_rolling(s, RollingConfig(window=8, estimator="symmetric"))
        asym = run_rolling(s, RollingConfig(window=8, estimator="asymmetric"))
        for a, b in zip(asym.episodes, sym.episodes):
            assert a.V0 <= b.V0 + 1e-12

    def test_fixed_strike_and_put(self):
        res = run_rolling(self.series(), RollingConfig(window=8, strike=95.0, option="put"))
        assert {e.strike for e in res.episodes} == {95.0}
        assert res.settings["strike"] == 95.0

    def test_constant_series(self):
        days = [dt.date(2024, 1, 1) + dt.timedelta(weeks=w, days=d) for w in range(6) for d in range(5)]
        s = PriceSeries(days, [Decimal(50)] * len(days))
        res = run_rolling(s, RollingConfig(window=3))
        assert all(e.V0 == 0 and e.epsilon == 0 for e in res.episodes)

    def test_one_bad_week_is_flagged(self):
        s = self.series(weeks=12)
        eps = episodes(s, 4)
        bad = eps[10]
        shocked = bad.closes[:2] + tuple(c * Decimal("1.2") for c in bad.closes[2:])
        eps[10] = type(bad)(bad.key, bad.dates, shocked)
        res = run_rolling(eps, RollingConfig(window=8))
        assert [e.covered for e in res.episodes] == [True, True, False, True]

    def test_parallel_is_deterministic(self):
        s = self.series(weeks=20)
        cfg = RollingConfig(window=8)
        assert run_rolling(s, cfg, jobs=3) == run_rolling(s, cfg, jobs=1)

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            run_rolling(self.series(weeks=5), RollingConfig(window=8))
