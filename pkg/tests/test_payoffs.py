from fractions import Fraction

import numpy as np
import pytest

from superhedge.payoffs import PayoffSpecError, PiecewisePayoff, estimate_asymptotic_slope, parse_payoff


def test_call_and_put():
    c, p = PiecewisePayoff.call(100), PiecewisePayoff.put(100)
    assert (c(80), c(130)) == (0, 30)
    assert (p(80), p(130)) == (20, 0)
    assert c.asymptotic_slope == 1 and p.asymptotic_slope == 0
    assert c.is_convex and p.is_convex


def test_exact_evaluation_with_fractions():
    assert PiecewisePayoff.call(100)(Fraction(400, 3)) == Fraction(100, 3)


def test_vectorized_matches_scalar():
    g = PiecewisePayoff.max_affine([(0, 5), (1, -100), (-0.5, 40)])
    xs = np.linspace(0, 300, 31)
    assert np.array_equal(g.evaluate(xs), np.array([g(x) for x in xs]))


def test_breakpoints_convexity_and_extrapolation():
    convex = PiecewisePayoff.from_breakpoints([0, 50, 100], [10, 0, 30])
    assert convex.is_convex and convex.asymptotic_slope == pytest.approx(0.6)
    assert convex(150) == pytest.approx(60)
    assert convex(-10) == pytest.approx(12)
    hump = PiecewisePayoff.from_breakpoints([0, 50, 100], [0, 10, 0])
    assert not hump.is_convex
    assert hump.affine_arrays() is None
    a, b = convex.affine_arrays()
    xs = np.linspace(0, 200, 41)
    assert np.allclose(np.max(np.outer(xs, a) + b, axis=1), convex.evaluate(xs))


@pytest.mark.parametrize("xs,ys", [([0], [1]), ([0, 0], [1, 2]), ([1, 0], [0, 0])])
def test_bad_breakpoints(xs, ys):
    with pytest.raises(PayoffSpecError):
        PiecewisePayoff.from_breakpoints(xs, ys)


def test_slope_estimate():
    assert estimate_asymptotic_slope(lambda z: max(z - 100, 0), scale=100) == pytest.approx(1.0, abs=1e-12)
    assert estimate_asymptotic_slope(lambda z: 3 * z + 7 + 50 / (1 + z), scale=1) == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(PayoffSpecError):
        estimate_asymptotic_slope(lambda z: z * z)
    with pytest.raises(PayoffSpecError):
        estimate_asymptotic_slope(lambda z: z * np.log(z))


def test_from_evaluator_estimates_slope():
    g = PiecewisePayoff.from_evaluator(lambda z: max(z - 100.0, 0.0), convex=True, scale=100.0)
    assert g.asymptotic_slope == pytest.approx(1.0)
    assert g(150.0) == 50.0


@pytest.mark.parametrize(
    "spec,x,value",
    [("call:100", 130, 30), ("put:100", 70, 30), ("linear:2,5", 10, 25), ("zero", 10, 0), (" CALL:50 ", 40, 0)],
)
def test_parse_payoff(spec, x, value):
    assert parse_payoff(spec)(x) == value


@pytest.mark.parametrize("spec", ["call", "call:abc", "straddle:100", "linear:1", "zero:3", ""])
def test_parse_payoff_rejects(spec):
    with pytest.raises(PayoffSpecError):
        parse_payoff(spec)
