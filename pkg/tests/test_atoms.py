"""Atoms, atomic representations and molecules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessel_hardy.functions import RadialFunction, indicator, piecewise_constant
from bessel_hardy.hardy import (AtomError, AtomicRepresentation, Molecule, atom_as_molecule,
                                atomic_norm_upper, eta_summable, make_atom, molecule_validate,
                                random_atom_family, riesz_atom_mean, riesz_atom_molecule,
                                riesz_molecule_decay, validate_atom)
from bessel_hardy.measure import (BesselParameter, Interval, ParameterError, measure_ball,
                                  measure_of_interval)
from bessel_hardy.quadrature import integrate_radial

P = BesselParameter(1.0)
I = Interval(1.5, 0.5)
SHAPES = ["two-step", "odd-bump", "random-seeded"]


def _l2(param, f, interval):
    g = RadialFunction(lambda y: f(y) ** 2, decay="compact", support=(interval.lo, interval.hi),
                       breakpoints=tuple(f.grid_points()))
    return math.sqrt(integrate_radial(param, g, g.grid(param, order=24)))


@pytest.mark.parametrize("shape", SHAPES)
@pytest.mark.parametrize("lam,p", [(0.5, 1.0), (1.0, 1.0), (1.0, 0.8), (2.7, 0.9)])
def test_atoms_validate(shape, lam, p):
    Q = BesselParameter(lam, p)
    a = make_atom(Q, I, shape, p)
    assert a.validation.passed
    assert a.validation.cancellation <= 1e-14 or shape == "odd-bump"
    assert _l2(Q, a.profile, I) == pytest.approx(measure_of_interval(Q, I) ** (0.5 - 1 / p), rel=1e-8)
    assert np.all(a(np.array([0.5, 0.99, 2.01, 5.0])) == 0)


def test_two_step_cancellation_exact():
    a = make_atom(P, I, "two-step")
    assert a.validation.cancellation <= 1e-14


@settings(max_examples=15)
@given(st.floats(0.2, 10.0), st.floats(0.05, 0.95), st.sampled_from([0.3, 1.0, 2.7]))
def test_atoms_valid_on_random_intervals(c, frac, lam):
    Q = BesselParameter(lam)
    J = Interval(c, frac * c)
    for shape in ("two-step", "odd-bump"):
        assert make_atom(Q, J, shape).validation.passed


def test_random_atoms_reproducible():
    a = make_atom(P, I, "random-seeded", seed=7)
    b = make_atom(P, I, "random-seeded", seed=7)
    c = make_atom(P, I, "random-seeded", seed=8)
    y = np.linspace(1.0, 2.0, 101)
    assert np.array_equal(a(y), b(y))
    assert not np.array_equal(a(y), c(y))
    fam1 = random_atom_family(P, 5, seed=3)
    fam2 = random_atom_family(P, 5, seed=3)
    assert [a.interval for a in fam1] == [a.interval for a in fam2]
    assert all(a.validation.passed for a in fam1)


def test_validate_rejects_bad_functions():
    mean_nonzero = validate_atom(P, indicator(1.0, 2.0), I, 1.0)
    assert not mean_nonzero.passed and mean_nonzero.cancellation == pytest.approx(1.0)
    outside = validate_atom(P, piecewise_constant([0.5, 1.5, 2.5], [1.0, -1.0]), I, 1.0)
    assert not outside.support_ok


def test_unknown_shape():
    with pytest.raises((AtomError, ValueError)):
        make_atom(P, I, "triangle")


def test_atomic_norm_upper():
    a = make_atom(P, I, "two-step")
    b = make_atom(P, Interval(3.0, 1.0), "odd-bump")
    assert atomic_norm_upper(AtomicRepresentation.single(a)) == 1.0
    assert atomic_norm_upper(AtomicRepresentation((1.0, 1.0), (a, b))) == 2.0
    assert atomic_norm_upper(AtomicRepresentation.zero()) == 0.0
    with pytest.raises(AtomError):
        AtomicRepresentation((1.0,), (a, b))
    with pytest.raises(ParameterError):
        BesselParameter(1.0, 2 / 3)


@pytest.mark.parametrize("shape", SHAPES)
def test_atoms_are_molecules(shape):
    for lam in (0.5, 1.0, 2.7):
        Q = BesselParameter(lam)
        a = make_atom(Q, Interval(2.0, 1.5), shape)
        rep = molecule_validate(Q, atom_as_molecule(Q, a))
        assert rep.passed, rep.to_dict()


def test_eta_summability():
    assert eta_summable(lambda k: 2.0 ** (-k / 3), 1.0)
    assert not eta_summable(lambda k: 1.0, 1.0)


def test_user_molecule_reports_each_condition():
    # y**(2 lam) e**-y minus a multiple of the indicator of (0, 1) fixing the mean
    base = integrate_radial(P, RadialFunction(lambda y: y ** 2 * np.exp(-y), decay="gaussian", scale=4.0))
    assert base == pytest.approx(24.0, rel=1e-10)
    c = base / (1 / 3)
    prof = RadialFunction(lambda y: y ** 2 * np.exp(-y) - c * ((y > 0) & (y < 1)), decay="gaussian",
                          scale=4.0, breakpoints=(1.0,), smooth=False)
    mol = Molecule(prof, measure_ball(P, 1.0, 1.0), 1.0, lambda k: 2.0 ** (-k / 3))
    rep = molecule_validate(P, mol)
    assert rep.passed_cancellation
    d = rep.to_dict()
    assert {"passed_size", "passed_annuli", "passed_cancellation"} <= set(d)


@pytest.mark.parametrize("lam,required", [(0.5, -0.9), (1.0, -(1 + 1.5) / 3 + 0.1)])
def test_riesz_decay_slope(lam, required):
    Q = BesselParameter(lam)
    rep = riesz_molecule_decay(Q, make_atom(Q, I, "two-step"))
    assert rep.required_slope == pytest.approx(required, rel=1e-12)
    assert rep.passed_slope and rep.passed_far_field


def test_riesz_of_atom_molecule_except_cancellation():
    a = make_atom(P, I, "two-step")
    rep = molecule_validate(P, riesz_atom_molecule(P, a), constant=2.0)
    assert rep.passed_size and rep.passed_annuli and rep.summable
    # R(a) has nonzero mean; see test_riesz_of_atom_mean
    assert not rep.passed_cancellation


def test_riesz_of_atom_mean():
    # int R(a) dm = -c int a(y) log y dm(y), c the log coefficient of the adjoint kernel
    a = make_atom(P, I, "two-step")
    m = riesz_atom_mean(P, a)
    assert m["mean"] == pytest.approx(m["predicted"], rel=1e-6)
    assert m["mean"] == pytest.approx(-0.19706137, rel=1e-6)
