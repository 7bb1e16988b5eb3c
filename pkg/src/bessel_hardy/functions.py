"""Radial functions on (0, inf) with the decay metadata the integrators need."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .measure import BesselParameter
from .quadrature import RadialGrid, build_radial_grid

DECAY_CLASSES = ("poisson", "gaussian", "compact", "custom")


@dataclass(frozen=True)
class RadialFunction:
    """A vectorized map ``(0, inf) -> R`` plus how it behaves at 0 and infinity.

    ``decay`` is one of ``poisson`` (``|f| <~ (1 + y**2)**(-lam-1)``), ``gaussian``,
    ``compact`` (zero outside ``support``) or ``custom`` (``|f| <~ y**(-exponent)``).
    ``breakpoints`` are places where ``f`` is not smooth (jumps when ``smooth``
    is False); ``focus`` lists ``(center, width)`` features such as peaks the
    quadrature grid should resolve.
    """

    func: Callable[[np.ndarray], np.ndarray]
    decay: str = "poisson"
    scale: float = 1.0
    exponent: Optional[float] = None
    support: Optional[tuple] = None
    breakpoints: tuple = ()
    focus: tuple = ()
    smooth: bool = True
    derivative: Optional[Callable] = None
    second_derivative: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        if self.decay not in DECAY_CLASSES:
            raise ValueError(f"decay must be one of {DECAY_CLASSES}, got {self.decay!r}")
        if self.decay == "compact" and self.support is None:
            raise ValueError("compact decay needs a support interval")
        if self.decay == "custom" and self.exponent is None:
            raise ValueError("custom decay needs an exponent")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.asarray(self.func(y), dtype=float)

    # grid ----------------------------------------------------------------
    def grid_points(self) -> list:
        pts = list(self.breakpoints)
        if self.support is not None:
            pts.extend(self.support)
        for c, w in self.focus:
            d = w
            pts.append(c)
            while d < c:
                pts.append(c + d)
                if c - d > 0.5 * c:
                    pts.append(c - d)
                d *= 2
        pts.append(self.scale)
        return [p for p in pts if p > 0]

    def grid_kwargs(self, param: BesselParameter) -> dict:
        kw = dict(scale=self.scale, decay=self.decay)
        if self.decay == "compact":
            kw["upper"] = self.support[1]
        if self.decay == "custom":
            kw["exponent"] = self.exponent
        return kw

    def grid(self, param: BesselParameter, order: int = 10, refine: int = 1,
             extra: Sequence[float] = ()) -> RadialGrid:
        kw = self.grid_kwargs(param)
        pts = self.grid_points() + [e for e in extra if e > 0]
        if self.decay == "compact":
            pts = [p for p in pts if p <= self.support[1]]
        return build_radial_grid(param, pts, order=order, refine=refine, **kw)

    # algebra ---------------------------------------------------------------
    def scaled(self, c: float) -> "RadialFunction":
        if is_piecewise(self):
            return piecewise_constant(self.func.edges, c * self.func.values, name=self.name)
        f, df, d2f = self.func, self.derivative, self.second_derivative
        return replace(
            self,
            func=lambda y: c * f(y),
            derivative=None if df is None else (lambda y: c * df(y)),
            second_derivative=None if d2f is None else (lambda y: c * d2f(y)),
            name=f"{c}*{self.name}",
        )

    def is_jump(self, x: float, rtol: float = 1e-12) -> bool:
        if self.smooth:
            return False
        pts = list(self.breakpoints) + list(self.support or ())
        return any(abs(x - b) <= rtol * max(abs(b), 1.0) for b in pts)

    def envelope(self, param: BesselParameter, y):
        """Decay envelope used by the sampled consistency check."""
        y = np.asarray(y, dtype=float)
        s = self.scale
        if self.decay == "poisson":
            return (1 + (y / s) ** 2) ** (-param.lam - 1)
        if self.decay == "gaussian":
            c = max([b for b in self.grid_points()] + [0.0])
            return np.where(y <= c, 1.0, np.exp(-((y - c) / s) ** 2 / 2))
        if self.decay == "compact":
            lo, hi = self.support
            return ((y >= lo) & (y <= hi)).astype(float)
        return (1 + y / s) ** (-self.exponent)


def decay_constant(param: BesselParameter, f: RadialFunction) -> float:
    """Smallest ``C`` with ``|f| <= C * envelope`` over ``y = 2**j``, ``j = -10..20``."""
    y = 2.0 ** np.arange(-10, 21)
    env = f.envelope(param, y)
    val = np.abs(f(y))
    if np.any((env == 0) & (val > 0)):
        return float("inf")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(env > 0, val / env, 0.0)
    return float(r.max())


def linear_combination(coeffs: Sequence[float], funcs: Sequence[RadialFunction], name: str = "") -> RadialFunction:
    """``sum_j c_j f_j`` with merged metadata (slowest decay wins)."""
    coeffs = [float(c) for c in coeffs]
    funcs = list(funcs)
    if len(coeffs) != len(funcs) or not funcs:
        raise ValueError("need matching nonempty coefficient and function lists")
    if all(is_piecewise(f) for f in funcs):
        edges = np.unique(np.concatenate([f.func.edges for f in funcs]))
        mids = 0.5 * (edges[:-1] + edges[1:])
        vals = sum(c * f(mids) for c, f in zip(coeffs, funcs))
        return piecewise_constant(edges, vals, name=name or "combination")

    def fn(y):
        out = np.zeros(np.shape(y))
        for c, f in zip(coeffs, funcs):
            out = out + c * f(y)
        return out

    order = {"compact": 0, "gaussian": 1, "custom": 2, "poisson": 3}
    worst = max(funcs, key=lambda f: (order[f.decay], -(f.exponent or 0)))
    decay = worst.decay
    support = None
    if decay == "compact":
        support = (min(f.support[0] for f in funcs), max(f.support[1] for f in funcs))
    exps = [f.exponent for f in funcs if f.decay == "custom"]
    bps = sorted({b for f in funcs for b in (f.breakpoints + tuple(f.support or ()))})
    focus = tuple(sorted({fc for f in funcs for fc in f.focus}))
    derivs = [f.derivative for f in funcs]
    deriv = None
    if all(d is not None for d in derivs):
        deriv = lambda y: sum(c * d(y) for c, d in zip(coeffs, derivs))
    return RadialFunction(
        fn, decay=decay, scale=max(f.scale for f in funcs),
        exponent=min(exps) if exps else None, support=support,
        breakpoints=tuple(bps), focus=focus,
        smooth=all(f.smooth for f in funcs), derivative=deriv, name=name or "combination",
    )


def zero_function() -> RadialFunction:
    return piecewise_constant([0.5, 1.0], [0.0], name="zero")


def constant_function(c: float = 1.0) -> RadialFunction:
    """Not integrable against dm; only usable where the kernel supplies decay."""
    return RadialFunction(lambda y: np.full(np.shape(y), float(c)), decay="custom", exponent=0.0,
                          derivative=lambda y: np.zeros(np.shape(y)),
                          second_derivative=lambda y: np.zeros(np.shape(y)), name=f"const{c}")


def indicator(lo: float, hi: float) -> RadialFunction:
    return piecewise_constant([lo, hi], [1.0])


def piecewise_constant(edges: Sequence[float], values: Sequence[float], name: str = "") -> RadialFunction:
    """``values[i]`` on ``[edges[i], edges[i+1])``, zero outside ``[edges[0], edges[-1])``."""
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(edges) != len(values) + 1 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
        raise ValueError("edges must be increasing, nonnegative and one longer than values")
    padded = np.concatenate([[0.0], values, [0.0]])

    def fn(y):
        return padded[np.searchsorted(edges, y, side="right")]

    fn.edges = edges
    fn.values = values
    return RadialFunction(fn, decay="compact", scale=float(edges[-1] - edges[0]),
                          support=(float(edges[0]), float(edges[-1])),
                          breakpoints=tuple(float(e) for e in edges), smooth=False,
                          name=name or "piecewise-constant")


def is_piecewise(f) -> bool:
    return hasattr(getattr(f, "func", None), "edges")


def piecewise_moments(param: BesselParameter, f: RadialFunction, power: float = 1.0) -> float:
    """Exact ``int |f|**power dm`` (``power=1`` with sign: ``int f dm``) for piecewise constants."""
    edges, values = f.func.edges, f.func.values
    d = param.dim
    seg = (edges[1:] ** d - edges[:-1] ** d) / d
    if power == 1.0:
        return float(np.dot(values, seg))
    return float(np.dot(np.abs(values) ** power, seg))


# --------------------------------------------------------------------------
# profiles


def poisson_constant(lam: float) -> float:
    """``2 lam Gamma(lam) / (Gamma(lam + 1/2) sqrt(pi))``."""
    return float(2 * lam * np.exp(gammaln(lam) - gammaln(lam + 0.5) - 0.5 * np.log(np.pi)))


def poisson_profile(param: BesselParameter) -> RadialFunction:
    """``P(x) = 2 lam Gamma(lam)/(Gamma(lam+1/2) sqrt(pi)) (1 + x**2)**(-lam-1)``, unit dm-mass."""
    lam = param.lam
    C = poisson_constant(lam)

    n = int(round(lam + 1))
    integer = n == lam + 1 and n <= 8

    def f(y):
        q = 1 + y * y
        if integer:
            out = q
            for _ in range(n - 1):
                out = out * q
            return C / out
        return C * q ** (-lam - 1)

    def df(y):
        return -2 * (lam + 1) * C * y * (1 + y * y) ** (-lam - 2)

    def d2f(y):
        q = 1 + y * y
        return C * (-2 * (lam + 1) * q ** (-lam - 2) + 4 * (lam + 1) * (lam + 2) * y * y * q ** (-lam - 3))

    return RadialFunction(f, decay="poisson", scale=1.0, derivative=df, second_derivative=d2f,
                          name="poisson")


def heat_constant(lam: float) -> float:
    """``2**((1 - 2 lam)/2) / Gamma(lam + 1/2)``."""
    return float(np.exp((0.5 - lam) * np.log(2.0) - gammaln(lam + 0.5)))


def heat_profile(param: BesselParameter) -> RadialFunction:
    """``W(x) = 2**((1-2 lam)/2) exp(-x**2/2) / Gamma(lam + 1/2)``, unit dm-mass."""
    C = heat_constant(param.lam)

    def f(y):
        return C * np.exp(-y * y / 2)

    return RadialFunction(f, decay="gaussian", scale=1.0,
                          derivative=lambda y: -y * f(y),
                          second_derivative=lambda y: (y * y - 1) * f(y), name="heat")


def profile(param: BesselParameter, name: str) -> RadialFunction:
    if name == "poisson":
        return poisson_profile(param)
    if name in ("heat", "gauss", "gaussian"):
        return heat_profile(param)
    raise ValueError(f"unknown profile {name!r}; use 'poisson' or 'heat'")
