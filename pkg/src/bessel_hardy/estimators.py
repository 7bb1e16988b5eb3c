"""Scikit-learn style transformer mapping functions to L^p norms of Hardy-space functionals."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .functions import RadialFunction, profile
from .hardy import Atom, AtomicRepresentation
from .kernels import TestFunctionParams
from .measure import BesselParameter
from .operators import (ConeSpec, TimeGrid, area_function, build_dictionary, g_function,
                        grand_maximal_lower, nontangential_maximal, radial_maximal)
from .quadrature import build_radial_grid, lp_from_values

FUNCTIONALS = ("radial", "nontangential", "grand", "g", "area")


def check_function_family(X) -> list:
    """Validate a family and return it as a list of radial functions.

    Accepts radial functions, atoms and atomic representations; rejects
    empty families and anything else.
    """
    if isinstance(X, (RadialFunction, Atom, AtomicRepresentation)):
        X = [X]
    try:
        items = list(X)
    except TypeError as exc:
        raise ValueError("expected a sequence of functions") from exc
    if not items:
        raise ValueError("function family is empty")
    out = []
    for i, item in enumerate(items):
        if isinstance(item, AtomicRepresentation):
            out.append(item.function())
        elif isinstance(item, Atom):
            out.append(item.profile)
        elif isinstance(item, RadialFunction):
            out.append(item)
        else:
            raise ValueError(f"family member {i} is a {type(item).__name__}, not a radial function")
    return out


def evaluation_grid(param: BesselParameter, f: RadialFunction, order: int = 6, refine: int = 1):
    """Radial grid for ``x`` in the L^p norm of a functional of ``f``.

    Functionals of a compactly supported mean-zero ``f`` decay like
    ``x**(-2 lam - 2)``, which sets the tail map.
    """
    pts = [p for p in f.grid_points() if p > 0]
    lo, hi = (f.support if f.support is not None else (min(pts), max(pts)))
    pts += [lo / 2, 2 * hi, 4 * hi]
    return build_radial_grid(param, pts, scale=max(hi, f.scale), decay="custom",
                             exponent=2 * param.lam + 2, order=order, refine=refine)


class HardyFunctionalTransformer(TransformerMixin, BaseEstimator):
    """Map each function in a family to ``||M(f)||_{L^p(dm)}`` for the chosen functionals.

    ``fit`` checks the parameter windows and precomputes the grand-maximal
    dictionary norms; ``transform`` returns an array of shape
    ``(n_functions, n_functionals)``. ``refine`` doubles the evaluation grid
    and the inner quadratures.
    """

    def __init__(self, lam: float = 1.0, p: float = 1.0, functionals: Sequence[str] = FUNCTIONALS,
                 phi: str = "poisson", beta: float = 0.5, gamma: float = 0.5, epsilon: float = 0.9,
                 k_min: int = -10, k_max: int = 10, subdivisions: int = 4, aperture: float = 1.0,
                 cone_points: int = 9, j_min: int = -16, j_max: int = 8, order: int = 8,
                 refine: int = 1, area_nodes: int = 3):
        self.lam = lam
        self.p = p
        self.functionals = functionals
        self.phi = phi
        self.beta = beta
        self.gamma = gamma
        self.epsilon = epsilon
        self.k_min = k_min
        self.k_max = k_max
        self.subdivisions = subdivisions
        self.aperture = aperture
        self.cone_points = cone_points
        self.j_min = j_min
        self.j_max = j_max
        self.order = order
        self.refine = refine
        self.area_nodes = area_nodes

    def fit(self, X=None, y=None):
        names = tuple(self.functionals)
        bad = [n for n in names if n not in FUNCTIONALS]
        if bad or not names:
            raise ValueError(f"unknown functionals {bad}; choose from {FUNCTIONALS}")
        self.param_ = BesselParameter(self.lam, self.p)
        tfp = TestFunctionParams(eps=self.epsilon, beta=self.beta, gamma=self.gamma)
        tfp.check_window(self.param_)
        self.phi_ = profile(self.param_, self.phi)
        self.tgrid_ = TimeGrid(self.k_min, self.k_max, self.subdivisions)
        self.cone_ = ConeSpec(self.aperture, self.cone_points)
        self.dictionary_ = (build_dictionary(self.param_, self.phi_, self.beta, self.gamma,
                                             range(self.j_min, self.j_max + 1))
                            if "grand" in names else [])
        self.feature_names_ = names
        return self

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_")
        return np.array(self.feature_names_, dtype=object)

    def _values(self, f: RadialFunction, name: str, x: np.ndarray) -> np.ndarray:
        P, phi = self.param_, self.phi_
        order = self.order + 2 * (self.refine - 1)
        kr = (self.k_min, self.k_max)
        if name == "radial":
            return radial_maximal(P, f, phi, x, self.tgrid_, order, self.refine)
        if name == "nontangential":
            return nontangential_maximal(P, f, phi, x, self.tgrid_, self.cone_, order, self.refine)
        if name == "grand":
            return grand_maximal_lower(P, f, x, self.dictionary_, phi, order, self.refine)
        if name == "g":
            return g_function(P, f, x, kr, phi, order, self.refine)
        return area_function(P, f, x, kr, self.cone_, phi, q=self.area_nodes * self.refine,
                             order=order, refine=self.refine)

    def transform_one(self, f: RadialFunction) -> np.ndarray:
        grid = evaluation_grid(self.param_, f, refine=self.refine)
        out = np.empty(len(self.feature_names_))
        for i, name in enumerate(self.feature_names_):
            vals = np.atleast_1d(self._values(f, name, grid.nodes))
            out[i] = lp_from_values(grid, vals, self.p)
        return out

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "param_")
        fam = check_function_family(X)
        return np.vstack([self.transform_one(f) for f in fam])
