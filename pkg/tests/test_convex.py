import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import close, lp_one_step, random_pwl, random_support, random_y
from superhedge.convex import (
    AIPViolation,
    InfeasibleMajorantError,
    SupportSet,
    biconjugate_price,
    concave_envelope_relative,
    fenchel_conjugate,
    one_step_price,
    one_step_price_convex,
    support_function,
)
from superhedge.payoffs import PiecewisePayoff

call100 = PiecewisePayoff.call(100)
zero = PiecewisePayoff.zero()
F = SupportSet.finite


class TestSupportSet:
    def test_sorted_unique(self):
        s = F([120, 80, 100, 80])
        assert s.points == (80, 100, 120)
        assert (s.essinf, s.esssup, len(s), s.kind) == (80, 120, 3, "finite")

    @pytest.mark.parametrize("pts", [[], [-1, 5]])
    def test_rejects(self, pts):
        with pytest.raises(ValueError):
            F(pts)

    def test_interval(self):
        s = SupportSet.interval(80, math.inf)
        assert s.kind == "interval" and s.hull_contains(1e300) and not s.hull_contains(79)
        with pytest.raises(ValueError):
            SupportSet.interval(5, 4)


class TestSupportFunction:
    def test_examples(self):
        # points below zero only occur after shifting by y; build the raw set directly
        assert support_function(SupportSet(-20, 20, (-20.0, 20.0)), 1) == 20
        assert support_function(F([10, 20]), 1) == -10
        assert support_function(F([10, 20]), 0) == 0

    def test_shift(self):
        # D - y with y = 100: immediate profit iff the value is negative
        assert support_function(F([80, 120]), 1, shift=100) == 20
        assert support_function(F([110, 120]), 1, shift=100) == -10

    def test_unbounded_interval(self):
        assert support_function(SupportSet.interval(0, math.inf), -1) == math.inf
        assert support_function(SupportSet.interval(10, math.inf), 1) == -10


class TestConjugate:
    def test_examples(self):
        d = F([80, 120])
        assert fenchel_conjugate(d, lambda z: 0, 1) == 120
        assert fenchel_conjugate(d, lambda z: 0, -1) == -80
        assert fenchel_conjugate(d, call100, 0) == 20

    @pytest.mark.parametrize("x", [-3.0, 0.0, 2.5])
    def test_singleton_is_linear(self, x):
        assert fenchel_conjugate(F([7]), lambda z: 0, x) == 7 * x

    def test_interval_diverges_past_slope(self):
        d = SupportSet.interval(80, math.inf)
        assert fenchel_conjugate(d, call100, -0.5) == math.inf
        assert fenchel_conjugate(d, call100, -1.0) == -80
        assert fenchel_conjugate(SupportSet.interval(80, 120), call100, 0.5) == 80

    def test_interval_needs_convex_payoff(self):
        with pytest.raises(ValueError):
            fenchel_conjugate(SupportSet.interval(0, 1), lambda z: z, 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
    def test_convex_in_x(self, seed, a, b):
        rng = np.random.default_rng(seed)
        pts = random_support(rng)
        g = random_pwl(rng)
        d = F(pts)
        mid = fenchel_conjugate(d, g, (a + b) / 2)
        assert mid <= (fenchel_conjugate(d, g, a) + fenchel_conjugate(d, g, b)) / 2 + 1e-9


class TestBiconjugate:
    def test_examples(self):
        d = F([80, 120])
        assert biconjugate_price(d, lambda z: 0, 100) == 0
        assert biconjugate_price(d, lambda z: 0, 70) == -math.inf

    def test_concave_affine_on_interval(self):
        g = PiecewisePayoff.linear(0.5, 3)
        assert biconjugate_price(SupportSet.interval(10, 50), g, 20) == pytest.approx(13)

    def test_minus_infinity_values_drop_out(self):
        d = F([80, 100, 120])
        assert biconjugate_price(d, [-math.inf, 5.0, 9.0], 110) == pytest.approx(7.0)
        assert biconjugate_price(d, [-math.inf, 5.0, 9.0], 90) == -math.inf
        assert biconjugate_price(d, [-math.inf] * 3, 100) == -math.inf

    def test_theta_certificate(self):
        r = one_step_price(F([80, 100, 120]), call100, 100)
        assert (r.price, r.theta, r.attained) == (10, 0.5, True)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_lp(self, seed):
        rng = np.random.default_rng(seed)
        pts = random_support(rng)
        g = random_pwl(rng)
        y = random_y(rng, pts)
        got = one_step_price(F(pts), g, y)
        want = lp_one_step(pts, [g(z) for z in pts], y)
        assert close(got.price, want)
        if got.attained:
            assert all(got.price + got.theta * (z - y) >= g(z) - 1e-9 for z in pts)
        else:
            assert got.immediate_profit

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_zero_payoff(self, seed):
        rng = np.random.default_rng(seed)
        pts = random_support(rng)
        y = random_y(rng, pts)
        price = biconjugate_price(F(pts), lambda z: 0.0, y)
        assert price == (0 if min(pts) <= y <= max(pts) else -math.inf)


class TestEnvelope:
    def test_examples(self):
        assert concave_envelope_relative(call100, F([80, 100, 120]), 100) == pytest.approx(10, abs=1e-12)
        assert concave_envelope_relative(call100, F([60, 130]), 60) == pytest.approx(0, abs=1e-12)
        assert concave_envelope_relative(zero, F([10, 50, 90]), 33) == pytest.approx(0, abs=1e-12)

    def test_outside_hull_is_an_error(self):
        with pytest.raises(AIPViolation):
            concave_envelope_relative(call100, F([80, 120]), 70)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_dominates_and_equals_biconjugate(self, seed):
        rng = np.random.default_rng(seed)
        pts = random_support(rng)
        g = random_pwl(rng)
        y = float(rng.uniform(min(pts), max(pts)))
        env = concave_envelope_relative(g, F(pts), y)
        assert close(env, biconjugate_price(F(pts), g, y))
        for z in pts:
            assert concave_envelope_relative(g, F(pts), z) >= g(z) - 1e-9
        if g.is_convex:
            for z in (min(pts), max(pts)):
                assert close(concave_envelope_relative(g, F(pts), z), g(z))

    def test_unbounded_convex_on_interval_needs_slope(self):
        g = PiecewisePayoff(is_convex=True, asymptotic_slope=math.inf, evaluator=lambda z: z * z)
        with pytest.raises(InfeasibleMajorantError):
            concave_envelope_relative(g, SupportSet.interval(0, math.inf), 3)


class TestConvexClosedForm:
    def test_examples(self):
        r = one_step_price_convex(call100, 100, 80, 120)
        assert (r.theta, r.price, r.attained) == (0.5, 10, True)
        assert one_step_price_convex(PiecewisePayoff.call(130), 100, 80, 120).price == 0
        assert one_step_price_convex(PiecewisePayoff.call(70), 100, 80, 120).price == 30
        r = one_step_price_convex(call100, 90, 90, 90)
        assert (r.theta, r.price) == (0, 0)

    def test_infinite_upper_uses_slope(self):
        r = one_step_price_convex(call100, 100, 80, math.inf)
        assert (r.theta, r.price) == (1, 20)

    def test_exact_arithmetic(self):
        r = one_step_price_convex(call100, Fraction(100), Fraction(50), Fraction(200))
        assert r.price == Fraction(100, 3) and r.theta == Fraction(2, 3)

    def test_rejects_outside(self):
        with pytest.raises(AIPViolation):
            one_step_price_convex(call100, 70, 80, 120)

    def test_interval_support_dispatch(self):
        assert one_step_price(SupportSet.interval(80, 120), call100, 70).price == -math.inf
        assert one_step_price(SupportSet.interval(80, 120), call100, 100).price == 10

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 200), st.floats(0, 200), st.floats(0, 1), st.floats(0, 300))
    def test_super_hedge_certificate(self, a, b, u, K):
        lo, hi = min(a, b), max(a, b)
        y = lo + u * (hi - lo)
        g = PiecewisePayoff.max_affine([(1, -K), (0, 0), (-0.3, 0.2 * K)])
        r = one_step_price_convex(g, y, lo, hi)
        for z in np.linspace(lo, hi, 25):
            assert r.price + r.theta * (z - y) >= g(z) - 1e-12 * max(1, K)
