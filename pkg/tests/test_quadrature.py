import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma, roots_jacobi

from bessel_hardy.functions import (heat_profile, indicator, linear_combination, poisson_profile,
                                    zero_function)
from bessel_hardy.measure import BesselParameter, measure_between
from bessel_hardy.quadrature import (PrincipalValueScheme, angular_mass, build_angular_rule,
                                     build_radial_grid, gauss_jacobi, graded_angular_rule,
                                     integrate_pv, integrate_radial, lp_quasinorm,
                                     richardson_sequence)

LAMS = [0.3, 0.5, 1.0, 2.7]


@pytest.mark.parametrize("n,a,b", [(5, 0.0, 0.0), (12, -0.5, -0.5), (20, 0.7, -0.3), (64, 1.7, 1.7)])
def test_gauss_jacobi_matches_scipy(n, a, b):
    x, w = gauss_jacobi(n, a, b)
    xs, ws = roots_jacobi(n, a, b)
    assert np.allclose(x, xs, atol=1e-13)
    assert np.allclose(w, ws, rtol=1e-11)


@pytest.mark.parametrize("lam", LAMS)
def test_angular_rule_total_weight(lam):
    rule = build_angular_rule(BesselParameter(lam), 64)
    exact = gamma(lam) * math.sqrt(math.pi) / gamma(lam + 0.5)
    assert abs(rule.weights.sum() - exact) / rule.weights.sum() <= 1e-12
    assert angular_mass(lam) == pytest.approx(exact, rel=1e-14)


def test_angular_rule_examples():
    assert build_angular_rule(BesselParameter(0.5), 16).weights.sum() == pytest.approx(math.pi, rel=1e-14)
    rule = build_angular_rule(BesselParameter(1.0), 16)
    assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)
    assert abs(np.dot(rule.weights, rule.cos_nodes)) < 1e-14


def test_angular_rule_needs_two_nodes():
    with pytest.raises(ValueError):
        build_angular_rule(BesselParameter(1.0), 1)


@pytest.mark.parametrize("lam", LAMS)
def test_angular_rule_doubling_is_stable(lam):
    P = BesselParameter(lam)
    g = lambda c: 1.0 / (2.5 - 2 * c) ** (lam + 1)
    vals = [np.dot(r.weights, g(r.cos_nodes)) for r in (build_angular_rule(P, n) for n in (64, 128))]
    assert vals[1] == pytest.approx(vals[0], rel=1e-10)


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("s", [2.0 ** -40, 2.0 ** -10, 0.5])
def test_graded_rule_integrates_peaked_kernel(lam, s):
    theta, _, _, w = graded_angular_rule(lam, s)
    assert w.sum() == pytest.approx(angular_mass(lam), rel=1e-12)
    # int_0^pi (sin th)^(2 lam - 1) / (s^2 + th^2)^(lam + 1/2) dth, checked against doubling
    g = lambda th: 1.0 / (s * s + th * th) ** (lam + 0.5)
    coarse = np.dot(w, g(theta))
    theta2, _, _, w2 = graded_angular_rule(lam, s, 24)
    assert np.dot(w2, g(theta2)) == pytest.approx(coarse, rel=1e-9)


def test_radial_integration_examples():
    half, one = BesselParameter(0.5), BesselParameter(1.0)
    assert integrate_radial(half, heat_profile(half)) == pytest.approx(1.0, rel=1e-8)
    assert integrate_radial(one, poisson_profile(one)) == pytest.approx(1.0, rel=1e-8)
    assert integrate_radial(one, zero_function()) == 0.0


@pytest.mark.parametrize("lam", LAMS)
def test_radial_integration_error_shrinks_under_refinement(lam):
    P = BesselParameter(lam)
    f = poisson_profile(P)
    errs = []
    for refine in (1, 2, 4):
        g = build_radial_grid(P, [1.0], order=6, refine=refine)
        errs.append(abs(np.dot(g.weights, f(g.nodes)) - 1.0))
    assert errs[0] <= 1e-6
    for a, b in zip(errs, errs[1:]):
        assert b <= max(a, 1e-12)


@given(st.sampled_from(LAMS), st.floats(0.01, 50.0), st.floats(0.01, 50.0))
def test_grid_reproduces_interval_measures(lam, a, b):
    P = BesselParameter(lam)
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        hi = lo + 1.0
    g = build_radial_grid(P, [lo, hi], decay="compact", upper=2 * hi)
    got = np.dot(g.weights, ((g.nodes > lo) & (g.nodes < hi)).astype(float))
    assert got == pytest.approx(float(measure_between(P, lo, hi)), rel=1e-8)
    assert np.all(np.diff(g.nodes) > 0) and np.all(g.weights > 0)


def test_lp_examples():
    P = BesselParameter(1.0)
    f = indicator(1.0, 2.0)
    assert lp_quasinorm(P, f, 2) == pytest.approx(math.sqrt(7 / 3), rel=1e-12)
    assert lp_quasinorm(P, f, 1) == pytest.approx(7 / 3, rel=1e-12)
    assert lp_quasinorm(P, f, np.inf) == 1.0
    for p in (0.8, 1.0, 2.0, np.inf):
        assert lp_quasinorm(P, zero_function(), p) == 0.0


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0),
       st.floats(-2, 2), st.floats(-2, 2), st.floats(0.8, 1.0))
def test_p_triangle_inequality(a, b, c, d, u, v, p):
    P = BesselParameter(1.0, p)
    f = linear_combination([u], [indicator(min(a, b), min(a, b) + abs(a - b) + 0.1)])
    g = linear_combination([v], [indicator(min(c, d), min(c, d) + abs(c - d) + 0.1)])
    s = linear_combination([1.0, 1.0], [f, g])
    lhs = lp_quasinorm(P, s, p) ** p
    rhs = lp_quasinorm(P, f, p) ** p + lp_quasinorm(P, g, p) ** p
    assert lhs <= rhs * (1 + 1e-9) + 1e-12


def _pv_setup():
    # K(x, y) y^(2 lam) = 1/(x - y), so the weight cancels; f(y) = y on (0, 2)
    P = BesselParameter(1.0)
    K = lambda y: 1.0 / (1.0 - y) / y ** 2
    f = lambda y: np.where(y < 2, y, 0.0)
    kw = dict(breakpoints=[2.0], grid_kwargs=dict(decay="compact", upper=2.0, lower=1e-6))
    return P, K, f, kw


@pytest.mark.parametrize("coeff", [None, 1.0])
def test_pv_known_value(coeff):
    P, K, f, kw = _pv_setup()
    r = integrate_pv(P, K, f, 1.0, singular_coeff=coeff, **kw)
    assert r.value == pytest.approx(-2.0, rel=1e-10)
    assert r.method == ("exclusion" if coeff is None else "subtraction")


@pytest.mark.parametrize("coeff", [None, 1.0])
def test_pv_halving_windows(coeff):
    P, K, f, kw = _pv_setup()
    a = integrate_pv(P, K, f, 1.0, PrincipalValueScheme(delta0=0.5), singular_coeff=coeff, **kw).value
    b = integrate_pv(P, K, f, 1.0, PrincipalValueScheme(delta0=0.25), singular_coeff=coeff, **kw).value
    assert abs(a - b) < 1e-6 * abs(a)


def test_pv_odd_kernel_symmetric_window():
    P = BesselParameter(1.0)
    K = lambda y: 1.0 / (1.0 - y) / y ** 2
    f = lambda y: np.where((y > 0.5) & (y < 1.5), 1.0, 0.0)
    r = integrate_pv(P, K, f, 1.0, PrincipalValueScheme(delta0=0.4), breakpoints=[0.5, 1.5],
                     grid_kwargs=dict(decay="compact", upper=2.0))
    assert abs(r.value) < 1e-12


def test_pv_scheme_deltas_decrease():
    d = PrincipalValueScheme().deltas(2.0)
    assert np.all(np.diff(d) < 0) and d[-1] > 0


def test_richardson_removes_linear_term():
    seq = [3.0 + 0.7 * 2.0 ** -m for m in range(6)]
    assert richardson_sequence(seq)[-1] == pytest.approx(3.0, rel=1e-14)
