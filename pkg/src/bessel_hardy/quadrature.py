"""Numerical integration against ``(sin t)**(2 lam - 1) dt`` on (0, pi) and ``dm`` on (0, inf).

Three layers live here:

* Gauss-Jacobi rules by Golub-Welsch (symmetric tridiagonal eigenproblem).
  The global :class:`AngularRule` is the Gauss-Gegenbauer rule obtained from
  ``u = cos(theta)``, which turns the angular weight into ``(1 - u**2)**(lam - 1)``.
* Graded composite angular rules for integrands concentrated near theta = 0
  with width ``s``; these evaluate peaked kernels such as ``P_t(x, y)`` for
  ``t`` and ``|x - y|`` small against ``sqrt(x y)``.
* Composite Gauss panels on (0, inf) against ``y**(2 lam) dy`` with a Jacobi
  first panel at the origin and an algebraically mapped tail, plus a
  principal-value integrator for first-order diagonal singularities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln, gammaln

from .measure import BesselParameter


# --------------------------------------------------------------------------
# Gauss-Jacobi by Golub-Welsch


def _jacobi_recurrence(n: int, alpha: float, beta: float):
    """Diagonal and off-diagonal of the Jacobi matrix for monic Jacobi polynomials."""
    k = np.arange(n, dtype=float)
    ab = alpha + beta
    diag = np.empty(n)
    diag[0] = (beta - alpha) / (ab + 2.0)
    if n > 1:
        kk = k[1:]
        diag[1:] = (beta ** 2 - alpha ** 2) / ((2 * kk + ab) * (2 * kk + ab + 2))
    off = np.empty(max(n - 1, 0))
    if n > 1:
        # k = 1 written out separately: the general formula is 0/0 at alpha + beta = -1
        off[0] = 4 * (1 + alpha) * (1 + beta) / ((2 + ab) ** 2 * (3 + ab))
        if n > 2:
            kk = k[2:]
            off[1:] = (4 * kk * (kk + alpha) * (kk + beta) * (kk + ab)
                       / ((2 * kk + ab) ** 2 * (2 * kk + ab + 1) * (2 * kk + ab - 1)))
    return diag, np.sqrt(off)


@lru_cache(maxsize=512)
def _gauss_jacobi_cached(n: int, alpha: float, beta: float):
    diag, off = _jacobi_recurrence(n, alpha, beta)
    nodes, vecs = eigh_tridiagonal(diag, off)
    log_mu0 = (alpha + beta + 1) * np.log(2.0) + betaln(alpha + 1, beta + 1)
    weights = np.exp(log_mu0) * vecs[0, :] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi(n: int, alpha: float, beta: float):
    """Nodes and weights for ``int_{-1}^{1} f(u) (1-u)**alpha (1+u)**beta du``.

    Exact for polynomials of degree ``2n - 1``. Requires ``alpha, beta > -1``.
    """
    if n < 1:
        raise ValueError("gauss_jacobi needs n >= 1")
    if alpha <= -1 or beta <= -1:
        raise ValueError(f"Jacobi exponents must exceed -1, got alpha={alpha}, beta={beta}")
    return _gauss_jacobi_cached(int(n), float(alpha), float(beta))


def gauss_legendre(n: int):
    return gauss_jacobi(n, 0.0, 0.0)


def angular_mass(lam: float) -> float:
    """``int_0^pi (sin t)**(2 lam - 1) dt = Gamma(lam) sqrt(pi) / Gamma(lam + 1/2)``."""
    return float(np.exp(gammaln(lam) + 0.5 * np.log(np.pi) - gammaln(lam + 0.5)))


def translation_constant(lam: float) -> float:
    """``c_lam = Gamma(lam + 1/2) / (Gamma(lam) sqrt(pi))``, the reciprocal of the angular mass."""
    return 1.0 / angular_mass(lam)


# --------------------------------------------------------------------------
# angular rules


@dataclass(frozen=True)
class AngularRule:
    """Quadrature for ``int_0^pi f(theta) (sin theta)**(2 lam - 1) d theta``.

    ``cos_nodes`` and ``half_sin2`` (``sin(theta/2)**2``) are stored so kernels
    can form ``x**2 + y**2 - 2xy cos(theta) = (x-y)**2 + 4xy sin(theta/2)**2``
    without cancellation.
    """

    lam: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray
    cos_nodes: np.ndarray
    half_sin2: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


def build_angular_rule(param: BesselParameter, n: int = 64) -> AngularRule:
    """Gauss-Gegenbauer rule in ``u = cos(theta)`` with weight ``(1-u**2)**(lam-1)``."""
    if n < 2:
        raise ValueError("angular rule order must be >= 2")
    lam = param.lam
    u, w = gauss_jacobi(n, lam - 1.0, lam - 1.0)
    theta = np.arccos(u)
    # sin^2(theta/2) = (1 - u)/2, accurate near u = 1 through the node's own formula
    half_sin2 = np.sin(theta / 2) ** 2
    return AngularRule(lam, int(n), theta, np.array(w), np.array(u), half_sin2)


@lru_cache(maxsize=4096)
def _graded_angular(lam: float, k: int, per_panel: int):
    """Composite angular rule resolved at width ``s = 2**k`` near theta = 0.

    Returns ``(theta, half_sin2, cos, weights)`` with the sin weight absorbed.
    Panels: ``[0, s]`` with Jacobi weight ``theta**(2 lam - 1)``, geometric
    panels up to pi/2, and ``[pi/2, pi]`` with weight ``(pi - theta)**(2 lam - 1)``.
    """
    a = 2 * lam - 1
    half = np.pi / 2
    s = min(2.0 ** k, half / 2)
    thetas, weights = [], []

    # [0, s]: theta = s (1+u)/2, weight theta^a absorbed by Jacobi beta = a
    u, w = gauss_jacobi(per_panel, 0.0, a)
    th = s * (1 + u) / 2
    thetas.append(th)
    weights.append(w * (s / 2) ** (a + 1) * (np.sin(th) / th) ** a)

    ug, wg = gauss_legendre(per_panel)
    lo = s
    while lo < half:
        hi = min(2 * lo, half)
        if half - hi < 0.25 * (hi - lo):
            hi = half
        th = lo + (hi - lo) * (1 + ug) / 2
        thetas.append(th)
        weights.append(wg * (hi - lo) / 2 * np.sin(th) ** a)
        lo = hi

    # [pi/2, pi]: phi = pi - theta in [0, pi/2] with weight phi^a
    u, w = gauss_jacobi(per_panel + 4, 0.0, a)
    ph = half * (1 + u) / 2
    thetas.append(np.pi - ph)
    weights.append(w * (half / 2) ** (a + 1) * (np.sin(ph) / ph) ** a)

    theta = np.concatenate(thetas)
    wts = np.concatenate(weights)
    hs2 = np.sin(theta / 2) ** 2
    cos = 1 - 2 * hs2
    for arr in (theta, wts, hs2, cos):
        arr.setflags(write=False)
    return theta, hs2, cos, wts


def graded_angular_rule(lam: float, s: float, per_panel: int = 12):
    """Graded rule for integrands of angular width about ``s``.

    ``s`` is rounded down to a power of two so rules are shared across calls.
    """
    s = float(s)
    k = int(np.floor(np.log2(s))) if s > 0 else -60
    k = max(min(k, -1), -60)
    return _graded_angular(float(lam), k, int(per_panel))


def angular_buckets(s: np.ndarray) -> np.ndarray:
    """Bucket index ``floor(log2 s)`` clipped to the graded-rule range."""
    with np.errstate(divide="ignore"):
        k = np.floor(np.log2(np.maximum(s, 2.0 ** -60)))
    return np.clip(k, -60, -1).astype(int)


def angular_integrate_batch(lam: float, s: np.ndarray, integrand, per_panel: int = 12) -> np.ndarray:
    """Evaluate ``sum_i w_i g(theta_i; j)`` for a batch of points ``j``.

    ``integrand(idx, half_sin2, cos)`` receives the indices of the batch points
    in one bucket together with the bucket's angular nodes (shape ``(1, m)``)
    and returns an array of shape ``(len(idx), m)``.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty(s.shape)
    flat_s = s.ravel()
    flat_out = out.ravel()
    buckets = angular_buckets(flat_s)
    for k in np.unique(buckets):
        idx = np.nonzero(buckets == k)[0]
        _, hs2, cos, w = _graded_angular(float(lam), int(k), int(per_panel))
        # chunk to keep temporaries bounded
        step = max(1, 2_000_000 // len(w))
        for start in range(0, len(idx), step):
            sub = idx[start:start + step]
            vals = integrand(sub, hs2[None, :], cos[None, :])
            flat_out[sub] = vals @ w
    return flat_out.reshape(s.shape)


# --------------------------------------------------------------------------
# radial grids


@dataclass(frozen=True)
class RadialGrid:
    """Nodes on (0, inf) with weights against ``dm = y**(2 lam) dy``.

    ``breaks`` are the panel endpoints (the first panel starts at 0); the last
    panel, when ``tail_exponent`` is set, covers ``[x_max, inf)`` through
    ``y = x_max / u`` assuming ``|f(y)| ~ y**(-tail_exponent)``.
    """

    lam: float
    nodes: np.ndarray
    weights: np.ndarray
    breaks: np.ndarray
    x_max: float
    tail_exponent: Optional[float]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def restrict(self, lo: float, hi: float) -> "RadialGrid":
        """Sub-grid of the panels inside ``[lo, hi]`` (``lo``, ``hi`` must be breakpoints)."""
        mask = (self.nodes > lo) & (self.nodes < hi)
        b = self.breaks[(self.breaks >= lo) & (self.breaks <= hi)]
        return RadialGrid(self.lam, self.nodes[mask], self.weights[mask], b, min(hi, self.x_max), None)


def _fill_geometric(points: np.ndarray, ratio: float) -> np.ndarray:
    """Insert points so consecutive ratios do not exceed ``ratio``."""
    out = [points[0]]
    for b in points[1:]:
        a = out[-1]
        if b / a > ratio:
            m = int(np.ceil(np.log(b / a) / np.log(ratio)))
            out.extend(a * (b / a) ** (np.arange(1, m) / m))
        out.append(b)
    return np.asarray(out)


def focus_ladder(center: float, width: float, reach: Optional[float] = None) -> list:
    """Breakpoints ``center +- width * 2**j`` grading panels toward ``center``."""
    if width <= 0 or center <= 0:
        return [center] if center > 0 else []
    reach = center if reach is None else reach
    pts = [center]
    d = width
    while d < reach:
        pts.append(center + d)
        if center - d > 0.5 * center:
            pts.append(center - d)
        d *= 2
    return pts


def panel_rule(a: float, b: float, order: int, lam: float, at_origin: bool):
    """Gauss panel on ``[a, b]`` against ``y**(2 lam) dy``."""
    if at_origin:
        u, w = gauss_jacobi(order, 0.0, 2 * lam)
        y = b * (1 + u) / 2
        return y, w * (b / 2) ** (2 * lam + 1)
    u, w = gauss_legendre(order)
    y = a + (b - a) * (1 + u) / 2
    return y, w * (b - a) / 2 * y ** (2 * lam)


def build_radial_grid(
    param: BesselParameter,
    breakpoints: Sequence[float] = (),
    *,
    scale: float = 1.0,
    decay: str = "poisson",
    exponent: Optional[float] = None,
    upper: Optional[float] = None,
    order: int = 10,
    refine: int = 1,
    ratio: float = 2.0,
    lower: Optional[float] = None,
) -> RadialGrid:
    """Composite grid adapted to the given breakpoints.

    ``decay`` controls the far end: ``"compact"`` stops at ``upper``;
    ``"gaussian"`` stops where ``exp(-y**2/(2 scale**2))`` beyond the largest
    breakpoint is below 1e-17; ``"poisson"``/``"custom"`` append a mapped tail
    panel for ``|f| ~ y**(-exponent)`` (``poisson`` means exponent ``2 lam + 2``).
    """
    lam = param.lam
    pts = sorted({float(b) for b in breakpoints if b > 0 and np.isfinite(b)})
    if not pts:
        pts = [scale]
    base_lo = lower if lower is not None else min(pts[0], scale) / 2
    top = max(pts[-1], scale)
    tail_q = None
    if decay == "compact":
        x_max = upper if upper is not None else top
    elif decay == "gaussian":
        x_max = top + 9.0 * scale if upper is None else upper
    elif decay in ("poisson", "custom"):
        tail_q = (2 * lam + 2) if decay == "poisson" and exponent is None else exponent
        if tail_q is None or tail_q <= 2 * lam + 1:
            raise ValueError(
                f"decay exponent {tail_q} does not make y**(2 lam) |f| integrable at infinity "
                f"(need exponent > 2 lam + 1 = {2 * lam + 1})"
            )
        x_max = upper if upper is not None else max(top, scale) * 64.0
    else:
        raise ValueError(f"unknown decay class {decay!r}")
    pts = [p for p in pts if p < x_max]
    pts = np.asarray(sorted(set([base_lo] + pts + [x_max])))
    pts = pts[pts >= base_lo]
    pts = _fill_geometric(pts, ratio)
    if refine > 1:
        fine = [pts[0]]
        for a, b in zip(pts[:-1], pts[1:]):
            fine.extend(a + (b - a) * np.arange(1, refine + 1) / refine)
        pts = np.asarray(fine)

    ys, ws = [], []
    y, w = panel_rule(0.0, pts[0], order * refine, lam, at_origin=True)
    ys.append(y)
    ws.append(w)
    for a, b in zip(pts[:-1], pts[1:]):
        y, w = panel_rule(a, b, order, lam, at_origin=False)
        ys.append(y)
        ws.append(w)
    if tail_q is not None:
        X = pts[-1]
        # int_X^inf f y^{2lam} dy = int_0^1 [f(X/u)(X/u)^q] X^{2lam+1-q} u^{q-2lam-2} du
        alpha_u = tail_q - 2 * lam - 2
        u, w = gauss_jacobi(order * refine + 6, 0.0, alpha_u)
        uu = (1 + u) / 2
        y = X / uu
        w = w * 0.5 ** (alpha_u + 1) * X ** (2 * lam + 1 - tail_q) * y ** tail_q
        ys.append(y[::-1])
        ws.append(w[::-1])
    nodes = np.concatenate(ys)
    weights = np.concatenate(ws)
    breaks = np.concatenate([[0.0], pts])
    return RadialGrid(lam, nodes, weights, breaks, float(pts[-1]), tail_q)


def integrate_values(grid: RadialGrid, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """``int f dm`` on a prepared grid."""
    return grid.integrate(f(grid.nodes))


def lp_from_values(grid: RadialGrid, values, p: float) -> float:
    """``(int |v|**p dm)**(1/p)`` from node values; grid max for ``p = inf``."""
    v = np.abs(np.asarray(values, dtype=float))
    if np.isinf(p):
        return float(v.max()) if v.size else 0.0
    if p <= 0:
        raise ValueError(f"p must be positive or inf, got {p}")
    total = grid.integrate(v ** p)
    return float(total ** (1.0 / p)) if total > 0 else 0.0


# --------------------------------------------------------------------------
# principal values


class PVConvergenceError(RuntimeError):
    """The exclusion-window sequence did not settle; carries the residuals."""

    def __init__(self, message: str, residuals):
        super().__init__(f"{message}; residuals={list(residuals)}")
        self.residuals = list(residuals)


@dataclass(frozen=True)
class PrincipalValueScheme:
    """Exclusion radii ``delta_m = delta0 * x * 2**-m`` for ``m < levels``.

    ``delta0`` is relative to the evaluation point. With ``subtraction`` and a
    known singular coefficient ``c`` (``K(x, y) y**(2 lam) ~ c/(x - y)``), the
    odd part is removed analytically and the remainder, which is at worst
    logarithmic, is integrated on panels graded down to ``floor * x``.
    """

    delta0: float = 0.5
    levels: int = 7
    richardson: bool = True
    subtraction: bool = True
    rtol: float = 1e-6
    atol: float = 1e-12
    floor: float = 1e-13
    order: int = 10

    def __post_init__(self):
        if not (0 < self.delta0 < 1):
            raise ValueError("delta0 must lie in (0, 1) (relative to x)")
        if self.levels < 2:
            raise ValueError("need at least two exclusion levels")
        if self.delta0 * 2.0 ** -(self.levels - 1) <= self.floor:
            raise ValueError("exclusion radii fall below the floor")

    def deltas(self, x: float) -> np.ndarray:
        return self.delta0 * x * 2.0 ** -np.arange(self.levels)


@dataclass
class PVResult:
    value: float
    method: str
    residuals: list = field(default_factory=list)
    flagged: bool = False


def richardson_sequence(values: Sequence[float]) -> np.ndarray:
    """Two-point Richardson for first-order error under radius halving."""
    v = np.asarray(values, dtype=float)
    return 2 * v[1:] - v[:-1]


def _window_panels(x, d0, d_min, extra, order):
    """Gauss-Legendre panels on ``(x-d0, x+d0)`` graded toward ``x``."""
    pts = {x - d0, x + d0}
    d = d0
    while d > d_min:
        d *= 0.5
        pts.update((x - d, x + d))
    pts.update(e for e in extra if x - d0 < e < x + d0 and e != x)
    pts = np.array(sorted(pts))
    left = pts[pts < x]
    right = pts[pts > x]
    u, w = gauss_legendre(order)
    ys, ws = [], []
    for seg in (left, right):
        for a, b in zip(seg[:-1], seg[1:]):
            ys.append(a + (b - a) * (1 + u) / 2)
            ws.append(w * (b - a) / 2)
    return np.concatenate(ys), np.concatenate(ws)


def integrate_pv(
    param: BesselParameter,
    kernel_slice: Callable[[np.ndarray], np.ndarray],
    f: Callable[[np.ndarray], np.ndarray],
    x: float,
    scheme: PrincipalValueScheme = PrincipalValueScheme(),
    *,
    singular_coeff: Optional[float] = None,
    smooth_at_x: bool = True,
    breakpoints: Sequence[float] = (),
    outer_grid: Optional[RadialGrid] = None,
    grid_kwargs: Optional[dict] = None,
) -> PVResult:
    """``lim_{delta -> 0} int_{|y-x| > delta} K(x, y) f(y) dm(y)``.

    ``kernel_slice`` maps an array of ``y`` to ``K(x, y)``. The outer part
    ``|y - x| >= delta0 * x`` uses ``outer_grid`` (or one built from
    ``breakpoints`` and ``grid_kwargs``); the window is integrated here.
    """
    lam = param.lam
    x = float(x)
    d0 = scheme.delta0 * x
    lo_w, hi_w = x - d0, x + d0
    if outer_grid is None:
        kw = dict(grid_kwargs or {})
        outer_grid = build_radial_grid(param, list(breakpoints) + [lo_w, hi_w, x], **kw)
    on = outer_grid.nodes
    mask = (on <= lo_w) | (on >= hi_w)
    yo = on[mask]
    outer = float(np.dot(outer_grid.weights[mask], kernel_slice(yo) * f(yo)))

    use_sub = scheme.subtraction and singular_coeff is not None and smooth_at_x
    deltas = np.sort(scheme.deltas(x))[::-1]
    d_min = scheme.floor * x if use_sub else deltas[-1]
    yw, ww = _window_panels(x, d0, d_min * 1.000001, breakpoints, scheme.order)
    h = kernel_slice(yw) * f(yw) * yw ** (2 * lam)
    if use_sub:
        fx = float(f(np.array([x]))[0])
        h = h - singular_coeff * fx / (x - yw)
    contrib = ww * h
    dist = np.abs(yw - x)
    if use_sub:
        value = outer + float(contrib.sum())
        # size of the innermost graded layer bounds the neglected core
        inner = float(np.abs(contrib[dist < 4 * d_min]).sum())
        return PVResult(value, "subtraction", [inner], False)

    # partial sums excluding |y - x| < delta_m, for every level
    partial = np.array([outer + contrib[dist > dm].sum() for dm in deltas])
    if scheme.richardson:
        seq = richardson_sequence(partial)
    else:
        seq = partial
    residuals = list(np.abs(np.diff(seq)))
    value = float(seq[-1])
    flagged = not smooth_at_x
    if residuals and residuals[-1] > scheme.rtol * abs(value) + scheme.atol and not flagged:
        raise PVConvergenceError(f"principal value at x={x} did not converge", residuals)
    return PVResult(value, "exclusion", residuals, flagged)


# --------------------------------------------------------------------------
# function-level entry points (``f`` needs ``__call__`` and ``grid(param)``)


def integrate_radial(param: BesselParameter, f, grid: Optional[RadialGrid] = None) -> float:
    """``int_0^inf f(y) y**(2 lam) dy`` on ``grid`` or on the grid ``f`` declares."""
    if grid is None:
        grid = f.grid(param)
    return grid.integrate(f(grid.nodes))


def lp_quasinorm(param: BesselParameter, f, p: float, grid: Optional[RadialGrid] = None) -> float:
    """``||f||_{L^p(dm)}``; the grid maximum for ``p = inf``."""
    if grid is None:
        grid = f.grid(param)
    return lp_from_values(grid, f(grid.nodes), p)
