import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from bessel_hardy.estimators import HardyFunctionalTransformer, check_function_family
from bessel_hardy.functions import indicator
from bessel_hardy.hardy import AtomicRepresentation, make_atom
from bessel_hardy.measure import BesselParameter, Interval, ParameterError

P = BesselParameter(1.0)
ATOM = make_atom(P, Interval(1.5, 0.5), "two-step")


def test_params_roundtrip_and_clone():
    est = HardyFunctionalTransformer(lam=2.0, functionals=("g",), order=6)
    params = est.get_params()
    assert params["lam"] == 2.0 and params["functionals"] == ("g",)
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(order=7)
    assert est.order == 7


def test_check_function_family():
    fam = check_function_family([ATOM, AtomicRepresentation.single(ATOM), indicator(1, 2)])
    assert len(fam) == 3
    assert len(check_function_family(ATOM)) == 1
    with pytest.raises(ValueError, match="empty"):
        check_function_family([])
    with pytest.raises(ValueError, match="not a radial function"):
        check_function_family([1.0])
    with pytest.raises(ValueError):
        check_function_family(3)


def test_fit_validates():
    with pytest.raises(ValueError, match="unknown functionals"):
        HardyFunctionalTransformer(functionals=("laplace",)).fit()
    with pytest.raises(ParameterError):
        HardyFunctionalTransformer(lam=1.0, p=0.5).fit()
    with pytest.raises(ValueError):
        HardyFunctionalTransformer(lam=1.0, p=0.8, beta=0.1).fit()


def test_transform_requires_fit():
    with pytest.raises(NotFittedError):
        HardyFunctionalTransformer().transform([ATOM])


def test_transform_shape_names_and_homogeneity():
    est = HardyFunctionalTransformer(functionals=("radial", "g"))
    out = est.fit_transform([ATOM, AtomicRepresentation.single(ATOM, 3.0)])
    assert out.shape == (2, 2)
    assert np.all(out > 0)
    assert np.allclose(out[1], 3 * out[0], rtol=1e-12)
    assert list(est.get_feature_names_out()) == ["radial", "g"]


def test_pipeline_compatible():
    pipe = Pipeline([("norms", HardyFunctionalTransformer(functionals=("g",)))])
    assert pipe.fit_transform([ATOM]).shape == (1, 1)
