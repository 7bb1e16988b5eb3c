import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bessel_hardy.measure import (BesselParameter, Interval, ParameterError, annulus, ball_measure,
                                  comparability_check, inverse_antiderivative, measure_ball,
                                  measure_between, measure_distance, measure_I,
                                  measure_of_interval)

lams = st.floats(0.05, 5.0)
pos = st.floats(1e-3, 1e3)


def test_measure_examples():
    P = BesselParameter(1.0)
    assert measure_of_interval(P, Interval(2.0, 1.0)) == pytest.approx(26 / 3, rel=1e-15)
    assert measure_of_interval(P, Interval(1.5, 0.5)) == pytest.approx(7 / 3, rel=1e-15)
    assert measure_I(P, 1.0, 2.0) == pytest.approx(9.0, rel=1e-15)
    assert measure_of_interval(BesselParameter(0.5), Interval(1.0, 0.5)) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("lam,p", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.75), (1.0, 1.01),
                                   (float("nan"), 1.0)])
def test_parameter_window_rejected(lam, p):
    with pytest.raises(ParameterError, match="violated"):
        BesselParameter(lam, p)


def test_parameter_window_message_names_bounds():
    with pytest.raises(ParameterError) as exc:
        BesselParameter(1.0, 0.7)
    assert "(2*lambda+1)/(2*lambda+2) < p <= 1" in str(exc.value)
    assert "0.75" in str(exc.value)


def test_interval_validation():
    with pytest.raises(ParameterError):
        Interval(0.0, 1.0)
    with pytest.raises(ParameterError):
        Interval.from_endpoints(2.0, 1.0)
    assert Interval(0.5, 1.0).lo == 0.0


def test_thin_interval_keeps_relative_accuracy():
    P = BesselParameter(2.7)
    x, h = 1024.0, 2.0 ** -30  # x + h is exact
    d = P.dim
    exact = x ** (d - 1) * h * (1 + (d - 1) * h / (2 * x))
    assert float(measure_between(P, x, x + h)) == pytest.approx(exact, rel=1e-12)


@given(lams, pos, pos, pos)
def test_additivity(lam, a, b, c):
    P = BesselParameter(lam)
    lo, mid, hi = sorted((a, b, c))
    total = float(measure_between(P, lo, hi))
    parts = float(measure_between(P, lo, mid)) + float(measure_between(P, mid, hi))
    assert parts == pytest.approx(total, rel=1e-9, abs=1e-300)


@given(lams, pos, pos, st.floats(0.1, 10.0))
def test_homogeneity(lam, x, r, s):
    P = BesselParameter(lam)
    lhs = float(measure_I(P, s * x, s * r))
    rhs = s ** P.dim * float(measure_I(P, x, r))
    assert lhs == pytest.approx(rhs, rel=1e-9)


@given(lams, st.lists(st.tuples(pos, pos), min_size=1, max_size=20))
def test_doubling_upper_bound_always_holds(lam, samples):
    rep = comparability_check(BesselParameter(lam), samples)
    assert rep.ratio_max <= 2.0 ** (2 * lam + 1) * (1 + 1e-12)


@given(st.floats(0.5, 5.0), st.lists(st.tuples(st.floats(2.5, 1e3), st.floats(1e-3, 1.0)), min_size=1, max_size=20))
def test_doubling_window_away_from_origin(lam, samples):
    # x > 2r keeps both intervals off the origin; lam >= 1/2 makes the weight convex
    assert comparability_check(BesselParameter(lam), samples).passed


def test_comparability_examples():
    P = BesselParameter(1.0)
    assert comparability_check(P, [(10, 0.01)]).ratio_min == pytest.approx(2, abs=1e-3)
    # exact value (2.001/1.001)**3 = 7.988, so the stated 1e-2 is read as relative
    assert comparability_check(P, [(0.001, 1)]).ratio_min == pytest.approx(8, rel=1e-2)
    assert comparability_check(P, [(1, 1)]).ratio_min == pytest.approx(27 / 8, rel=1e-14)


def test_doubling_lower_bound_is_only_up_to_a_constant():
    # for small lambda the clipped ratio (3/2)**(2 lam + 1) drops below 2
    rep = comparability_check(BesselParameter(0.25), [(1.0, 1.0)])
    assert rep.ratio_min == pytest.approx(1.5 ** 1.5, rel=1e-14)
    assert not rep.passed


def test_comparability_rejects_bad_samples():
    with pytest.raises(ValueError):
        comparability_check(BesselParameter(1.0), [])
    with pytest.raises(ValueError):
        comparability_check(BesselParameter(1.0), [(1.0, -1.0)])


@given(lams, st.floats(1e-6, 1e6))
def test_inverse_antiderivative_roundtrip(lam, y):
    P = BesselParameter(lam)
    v = y ** P.dim / P.dim
    assert float(inverse_antiderivative(P, v)) == pytest.approx(y, rel=1e-12)


@given(lams, pos, pos, pos)
def test_distance_is_a_metric(lam, x, y, z):
    P = BesselParameter(lam)
    dxy, dyz, dxz = (measure_distance(P, x, y), measure_distance(P, y, z), measure_distance(P, x, z))
    assert dxy == measure_distance(P, y, x)
    assert dxz <= (dxy + dyz) * (1 + 1e-12)


@given(lams, st.floats(0.01, 100.0), st.floats(1e-3, 1e3))
def test_ball_has_measure_at_most_twice_radius(lam, x0, r):
    P = BesselParameter(lam)
    assume(r > 1e-9 * x0 ** P.dim / P.dim)  # ball resolvable in double precision
    b = measure_ball(P, x0, r)
    m = ball_measure(P, b)
    # float endpoints of a thin ball carry relative error ~ eps * x0 / (hi - lo)
    tol = 1e-12 + 4e-16 * P.dim * b.hi / (b.hi - b.lo)
    assert m <= 2 * r * (1 + tol)
    assert m >= r * (1 - tol)
    if b.lo > 0:
        assert m == pytest.approx(2 * r, rel=tol)


@given(lams, st.floats(0.1, 10.0), st.floats(1e-2, 10.0), st.integers(1, 12))
def test_annuli_measure_and_disjointness(lam, x0, r, k):
    P = BesselParameter(lam)
    ball = measure_ball(P, x0, r)
    mB = ball_measure(P, ball)
    Rk = annulus(P, ball, k)
    total = sum(float(measure_between(P, a, b)) for a, b in Rk.pieces)
    assert total <= 2 ** k * mB * (1 + 1e-9)
    nxt = annulus(P, ball, k + 1)
    for a, b in Rk.pieces:
        mid = 0.5 * (a + b)
        assert Rk.contains(mid)
        assert not nxt.contains(mid)
        d = measure_distance(P, mid, x0)
        assert 2 ** (k - 1) * mB * (1 - 1e-9) <= d < 2 ** k * mB * (1 + 1e-9)


def test_annulus_index_validation():
    P = BesselParameter(1.0)
    ball = measure_ball(P, 1.0, 0.5)
    with pytest.raises(ParameterError):
        annulus(P, ball, 0)
    assert math.isclose(ball.center, 1.0)
    assert np.all(np.diff([p for piece in annulus(P, ball, 3).pieces for p in piece]) > 0)
