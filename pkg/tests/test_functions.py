import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bessel_hardy.functions import (RadialFunction, decay_constant, heat_profile, indicator,
                                    is_piecewise, linear_combination, piecewise_constant,
                                    piecewise_moments, poisson_profile, profile, zero_function)
from bessel_hardy.measure import BesselParameter
from bessel_hardy.quadrature import integrate_radial

LAMS = [0.3, 0.5, 1.0, 2.7]


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("name", ["poisson", "heat"])
def test_profiles_have_unit_mass(lam, name):
    P = BesselParameter(lam)
    assert integrate_radial(P, profile(P, name)) == pytest.approx(1.0, rel=1e-10)


def test_poisson_profile_lambda1_closed_form():
    P = BesselParameter(1.0)
    y = np.array([0.0, 0.5, 2.0, 1e3])
    assert np.allclose(poisson_profile(P)(y), 4 / math.pi / (1 + y * y) ** 2, rtol=1e-14)


@pytest.mark.parametrize("lam", LAMS)
def test_profile_derivatives_match_finite_differences(lam):
    P = BesselParameter(lam)
    for phi in (poisson_profile(P), heat_profile(P)):
        y, h = np.array([0.3, 1.0, 2.5]), 1e-4
        fd1 = (phi(y + h) - phi(y - h)) / (2 * h)
        fd2 = (phi(y + h) - 2 * phi(y) + phi(y - h)) / h ** 2
        assert np.allclose(phi.derivative(y), fd1, rtol=1e-7, atol=1e-10)
        assert np.allclose(phi.second_derivative(y), fd2, rtol=1e-6, atol=1e-7)


def test_unknown_profile():
    with pytest.raises(ValueError, match="unknown profile"):
        profile(BesselParameter(1.0), "cauchy")


def test_radial_function_metadata_checks():
    with pytest.raises(ValueError):
        RadialFunction(np.sin, decay="fast")
    with pytest.raises(ValueError):
        RadialFunction(np.sin, decay="compact")
    with pytest.raises(ValueError):
        RadialFunction(np.sin, decay="custom")


def test_piecewise_constant_values_and_validation():
    f = piecewise_constant([1.0, 2.0, 3.0], [4.0, -1.0])
    assert list(f(np.array([0.5, 1.5, 2.5, 3.5]))) == [0.0, 4.0, -1.0, 0.0]
    assert is_piecewise(f) and not f.smooth
    assert f.is_jump(2.0) and not f.is_jump(1.5)
    with pytest.raises(ValueError):
        piecewise_constant([2.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        piecewise_constant([1.0, 2.0], [1.0, 2.0])


def test_piecewise_moments():
    P = BesselParameter(1.0)
    f = piecewise_constant([1.0, 2.0, 3.0], [3.0, -1.0])
    assert piecewise_moments(P, f, 1.0) == pytest.approx(3 * 7 / 3 - 19 / 3, rel=1e-13)
    assert piecewise_moments(P, f, 0.5) == pytest.approx(math.sqrt(3) * 7 / 3 + 19 / 3, rel=1e-13)
    assert piecewise_moments(P, indicator(1, 2), 2.0) == pytest.approx(7 / 3, rel=1e-14)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4), st.floats(0.1, 4.0))
def test_linear_combination_pointwise(coeffs, y):
    funcs = [indicator(0.5 * (i + 1), 0.5 * (i + 3)) for i in range(len(coeffs))]
    comb = linear_combination(coeffs, funcs)
    expect = sum(c * float(f(np.array([y]))[0]) for c, f in zip(coeffs, funcs))
    assert float(comb(np.array([y]))[0]) == pytest.approx(expect, abs=1e-12)


def test_linear_combination_mixed_keeps_decay():
    P = BesselParameter(1.0)
    comb = linear_combination([1.0, -1.0], [poisson_profile(P), heat_profile(P)])
    assert integrate_radial(P, comb) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        linear_combination([], [])


def test_decay_constant():
    P = BesselParameter(1.0)
    assert decay_constant(P, poisson_profile(P)) == pytest.approx(4 / math.pi, rel=1e-12)
    assert decay_constant(P, zero_function()) == 0.0
    slow = RadialFunction(lambda y: 1 / (1 + y), decay="poisson")
    assert decay_constant(P, slow) > 1e10
