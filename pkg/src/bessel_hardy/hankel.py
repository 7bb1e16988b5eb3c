"""Hankel translation and convolution, dilations, and the kernel class test."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import betainc, betaln, gammaln

from .functions import RadialFunction
from .measure import BesselParameter
from .quadrature import (AngularRule, RadialGrid, angular_integrate_batch,
                         translation_constant)


class RuleMismatchError(ValueError):
    pass


def _check_rule(param: BesselParameter, rule: Optional[AngularRule]):
    if rule is not None and abs(rule.lam - param.lam) > 1e-15 * max(1.0, param.lam):
        raise RuleMismatchError(f"angular rule built for lambda={rule.lam}, used with lambda={param.lam}")


def triangle_density(param: BesselParameter, x, y, z):
    """Density ``D(x, y, z)`` with ``tau_x g(y) = int g(z) D(x, y, z) dm(z)``.

    Zero unless ``x, y, z`` are the sides of a nondegenerate triangle.
    """
    lam = param.lam
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    s = np.sort(np.stack([x, y, z]), axis=0)
    c, b, a = s[0], s[1], s[2]
    # stable Heron: a >= b >= c
    q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    ok = q > 0
    area = 0.25 * np.sqrt(np.where(ok, q, 1.0))
    logc = (2 * lam - 2) * np.log(2.0) + gammaln(lam + 0.5) - gammaln(lam) - 0.5 * np.log(np.pi)
    with np.errstate(divide="ignore"):
        val = np.exp(logc) * (x * y * z) ** (1 - 2 * lam) * area ** (2 * lam - 2)
    out = np.where(ok, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _translate_scale(g: RadialFunction, x, y):
    width = g.scale
    return width / np.sqrt(x * y)


def hankel_translate(param: BesselParameter, g: RadialFunction, x, y,
                     rule: Optional[AngularRule] = None, per_panel: int = 12):
    """``tau_x g(y) = c_lam int_0^pi g(sqrt(x**2 + y**2 - 2xy cos t)) (sin t)**(2 lam - 1) dt``.

    With ``rule`` the global angular rule is used; otherwise a graded rule
    resolving angular width ``g.scale / sqrt(x y)``.
    """
    _check_rule(param, rule)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    c = translation_constant(param.lam)
    if rule is not None:
        d2 = (x - y)[..., None] ** 2 + 4 * (x * y)[..., None] * rule.half_sin2
        out = c * (g(np.sqrt(d2)) @ rule.weights)
    else:
        xf, yf = x.ravel(), y.ravel()

        def integrand(idx, hs2, cos):
            d2 = (xf[idx] - yf[idx])[:, None] ** 2 + 4 * (xf[idx] * yf[idx])[:, None] * hs2
            return g(np.sqrt(d2))

        out = c * angular_integrate_batch(param.lam, _translate_scale(g, xf, yf), integrand, per_panel)
        out = out.reshape(x.shape)
    return float(out) if np.ndim(out) == 0 else out


def translate_via_density(param: BesselParameter, g: RadialFunction, x: float, y: float,
                          n: int = 200) -> float:
    """``int g(z) D(x, y, z) dm(z)`` over ``(|x-y|, x+y)``; independent route for tests."""
    from .quadrature import gauss_jacobi
    lam = param.lam
    lo, hi = abs(x - y), x + y
    # D ~ (z - lo)^(lam-1) (hi - z)^(lam-1) near both ends
    e = lam - 1.0
    u, w = gauss_jacobi(n, e, e)
    z = lo + (hi - lo) * (1 + u) / 2
    # strip the endpoint factors the Jacobi weight already carries
    ends = ((z - lo) * (hi - z)) ** e
    ends = np.where(ends > 0, ends, 1.0)
    integrand = g(z) * triangle_density(param, x, y, z) * z ** (2 * lam) / ends
    return float(np.dot(w, integrand) * ((hi - lo) / 2) ** (2 * e + 1))


def translate_indicator(param: BesselParameter, b: float, x, z):
    """Closed form of ``tau_x chi_(0, b)(z)`` through the regularized incomplete beta."""
    lam = param.lam
    x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (x * x + z * z - b * b) / (2 * x * z)
    u = np.clip(u, -1.0, 1.0)
    # fraction of angular mass with cos(theta) > u
    frac = betainc(lam, lam, (1 - u) / 2)
    out = np.where(b <= np.abs(x - z), 0.0, np.where(b >= x + z, 1.0, frac))
    return float(out) if out.ndim == 0 else out


def dilate(param: BesselParameter, phi: RadialFunction, t: float) -> RadialFunction:
    """``phi_t(y) = t**(-2 lam - 1) phi(y / t)``."""
    if t <= 0:
        raise ValueError("dilation needs t > 0")
    t = float(t)
    if t == 1.0:
        return phi
    k = t ** (-param.dim)
    f, df, d2f = phi.func, phi.derivative, phi.second_derivative
    return replace(
        phi,
        func=lambda y: k * f(y / t),
        derivative=None if df is None else (lambda y: k / t * df(y / t)),
        second_derivative=None if d2f is None else (lambda y: k / t ** 2 * d2f(y / t)),
        scale=phi.scale * t,
        support=None if phi.support is None else (phi.support[0] * t, phi.support[1] * t),
        breakpoints=tuple(b * t for b in phi.breakpoints),
        focus=tuple((c * t, w * t) for c, w in phi.focus),
        name=f"{phi.name}_t={t}",
    )


def hankel_convolve(param: BesselParameter, f: RadialFunction, g: RadialFunction, x,
                    rule: Optional[AngularRule] = None, grid: Optional[RadialGrid] = None,
                    per_panel: int = 12):
    """``(f # g)(x) = int f(y) tau_x g(y) dm(y)`` for one or many ``x``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, xi in enumerate(xs):
        gr = grid
        if gr is None:
            gr = f.grid(param, extra=focus_points(xi, g.scale))
        vals = hankel_translate(param, g, xi, gr.nodes, rule, per_panel)
        out[i] = gr.integrate(f(gr.nodes) * vals)
    return float(out[0]) if np.ndim(x) == 0 else out


def focus_points(c: float, w: float) -> list:
    pts = [c]
    d = w
    while d < c:
        pts += [c + d, c - d] if c - d > 0.5 * c else [c + d]
        d *= 2
    pts.append(c + d)
    return pts


# --------------------------------------------------------------------------
# kernel class


@dataclass
class ZClassReport:
    """Sampled constants for the pointwise, first- and second-derivative bounds."""

    C0: float
    C1: float
    C2: float
    nonnegative: bool
    passed_pointwise: bool
    passed_first: bool
    passed_second: bool

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.passed_pointwise and self.passed_first and self.passed_second


def _fd_derivative(f, y, order: int, rel: float = 1e-5):
    """Central differences with one Richardson step (step ``rel * max(y, 1)``)."""
    h = rel * np.maximum(y, 1.0)

    def d(hh):
        if order == 1:
            return (f(y + hh) - f(y - hh)) / (2 * hh)
        return (f(y + hh) - 2 * f(y) + f(y - hh)) / hh ** 2

    return (4 * d(h / 2) - d(h)) / 3


def _sup_is_finite(ratio: np.ndarray) -> bool:
    """Finite unless the sampled ratio still grows at either end of the grid."""
    if not np.all(np.isfinite(ratio)):
        return False
    top = ratio.max()
    if top == 0:
        return True
    grows_hi = ratio[-1] >= top * (1 - 1e-9) and ratio[-1] > ratio[-2] * (1 + 1e-6)
    grows_lo = ratio[0] >= top * (1 - 1e-9) and ratio[0] > ratio[1] * (1 + 1e-6)
    return not (grows_hi or grows_lo)


def z_class_check(param: BesselParameter, phi: RadialFunction,
                  sample_grid: Optional[Sequence[float]] = None) -> ZClassReport:
    """Smallest sampled constants in the three decay bounds defining the class.

    ``0 <= phi <= C0 (1+x^2)^(-lam-1)``, ``|phi'| <= C1 x (1+x^2)^(-lam-2)``,
    ``|phi''| <= C2 (1+x^2)^(-lam-2)``. A constant counts as infinite when
    the ratio is still increasing at an end of the sample grid.
    """
    lam = param.lam
    y = np.asarray(sample_grid if sample_grid is not None else 2.0 ** np.linspace(-10, 20, 121),
                   dtype=float)
    y = np.sort(y)
    v = phi(y)
    d1 = phi.derivative(y) if phi.derivative is not None else _fd_derivative(phi, y, 1)
    d2 = phi.second_derivative(y) if phi.second_derivative is not None else _fd_derivative(phi, y, 2)
    q = 1 + y * y
    r0 = np.abs(v) / q ** (-lam - 1)
    r1 = np.abs(d1) / (y * q ** (-lam - 2))
    r2 = np.abs(d2) / q ** (-lam - 2)
    ok0, ok1, ok2 = _sup_is_finite(r0), _sup_is_finite(r1), _sup_is_finite(r2)
    return ZClassReport(
        C0=float(r0.max()) if ok0 else float("inf"),
        C1=float(r1.max()) if ok1 else float("inf"),
        C2=float(r2.max()) if ok2 else float("inf"),
        nonnegative=bool(np.all(v >= 0)),
        passed_pointwise=ok0, passed_first=ok1, passed_second=ok2,
    )
