"""Hardy spaces of the Bessel operator ``-d^2/dx^2 - (2 lam/x) d/dx`` on (0, inf), numerically.

Submodules, bottom up: ``measure`` (closed-form measure arithmetic),
``quadrature``, ``functions`` (radial functions and kernel profiles),
``hankel`` (translation and convolution), ``kernels``, ``operators``
(semigroups, maximal and square functions, Riesz transform, PDE checks),
``hardy`` (atoms, molecules, experiments), ``estimators`` and ``cli``.
"""

from .measure import BesselParameter, Interval, ParameterError
from .functions import RadialFunction, heat_profile, piecewise_constant, poisson_profile
from .hardy import (Atom, AtomicRepresentation, equivalence_experiment, make_atom,
                    random_atom_family, riesz_characterization_experiment)
from .estimators import HardyFunctionalTransformer, check_function_family

__version__ = "0.1.0"

__all__ = [
    "BesselParameter", "Interval", "ParameterError", "RadialFunction", "heat_profile",
    "piecewise_constant", "poisson_profile", "Atom", "AtomicRepresentation",
    "equivalence_experiment", "make_atom", "random_atom_family",
    "riesz_characterization_experiment", "HardyFunctionalTransformer", "check_function_family",
]
