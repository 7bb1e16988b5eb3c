"""Atoms, molecules and the experiment drivers built on them."""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .functions import (RadialFunction, is_piecewise, linear_combination, piecewise_constant,
                        zero_function)
from .kernels import riesz_kernel
from .measure import (BesselParameter, Interval, MeasureBall, ParameterError, annulus,
                      ball_measure, measure_ball, measure_distance, measure_of_interval)
from .quadrature import build_radial_grid, gauss_legendre

ATOM_SHAPES = ("two-step", "odd-bump", "random-seeded")


class AtomError(ValueError):
    pass


# --------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class AtomValidation:
    support_ok: bool
    size_ratio: float
    cancellation: float

    @property
    def passed(self) -> bool:
        return self.support_ok and self.size_ratio <= 1 + 1e-10 and self.cancellation <= 1e-10


@dataclass(frozen=True)
class Atom:
    """Mean-zero function supported in ``interval`` with ``||a||_2 <= m(I)**(1/2 - 1/p)``."""

    interval: Interval
    profile: RadialFunction
    p: float
    shape: str
    validation: AtomValidation

    def __call__(self, y):
        return self.profile(y)


def _panel_nodes(edges: Sequence[float], n: int):
    u, w = gauss_legendre(n)
    e = np.asarray(edges, dtype=float)
    a, b = e[:-1, None], e[1:, None]
    return (a + (b - a) * (1 + u) / 2).ravel(), (w * (b - a) / 2).ravel()


def _moments(param: BesselParameter, f: RadialFunction, interval: Interval, n: int = 64):
    """``(int f dm, int |f| dm, int f**2 dm)`` over the interval."""
    if is_piecewise(f):
        e, v = f.func.edges, f.func.values
        seg = (e[1:] ** param.dim - e[:-1] ** param.dim) / param.dim
        return math.fsum(v * seg), math.fsum(np.abs(v) * seg), math.fsum(v ** 2 * seg)
    pts = sorted({interval.lo, interval.hi} | {b for b in f.breakpoints if interval.lo < b < interval.hi})
    y, w = _panel_nodes(pts, n)
    w = w * y ** (2 * param.lam)
    v = f(y)
    return float(w @ v), float(w @ np.abs(v)), float(w @ v ** 2)


def validate_atom(param: BesselParameter, f: RadialFunction, interval: Interval, p: float) -> AtomValidation:
    lo, hi = interval.lo, interval.hi
    probe = np.array([lo * (1 - 1e-9), lo * 0.5, hi * (1 + 1e-9), hi * 2])
    support_ok = bool(np.all(f(probe[probe > 0]) == 0)) and (
        f.support is None or (f.support[0] >= lo * (1 - 1e-12) and f.support[1] <= hi * (1 + 1e-12)))
    mean, l1, l2sq = _moments(param, f, interval)
    bound = measure_of_interval(param, interval) ** (0.5 - 1 / p)
    size_ratio = np.sqrt(l2sq) / bound
    cancellation = abs(mean) / l1 if l1 > 0 else 0.0
    return AtomValidation(support_ok, float(size_ratio), float(cancellation))


def _two_step(param: BesselParameter, interval: Interval) -> RadialFunction:
    lo, mid, hi = interval.lo, interval.center, interval.hi
    d = param.dim
    mL = (mid ** d - lo ** d) / d
    mR = (hi ** d - mid ** d) / d
    # A mL + B mR = 0
    return piecewise_constant([lo, mid, hi], [mR, -mL], name="two-step")


def _odd_bump(param: BesselParameter, interval: Interval) -> RadialFunction:
    """``(1 - s**2)**3 (s - sigma)`` with ``s = (y - x0)/r`` and ``sigma`` fixing the dm-mean."""
    x0, r, lam = interval.center, interval.radius, param.lam
    u, w = gauss_legendre(96)
    bump = (1 - u * u) ** 3 * (x0 + r * u) ** (2 * lam)
    sigma = float((bump * u) @ w / (bump @ w))

    def f(y):
        s = (np.asarray(y, dtype=float) - x0) / r
        inside = np.abs(s) < 1
        return np.where(inside, (1 - s * s) ** 3 * (s - sigma), 0.0)

    def df(y):
        s = (np.asarray(y, dtype=float) - x0) / r
        inside = np.abs(s) < 1
        val = -6 * s * (1 - s * s) ** 2 * (s - sigma) + (1 - s * s) ** 3
        return np.where(inside, val / r, 0.0)

    return RadialFunction(f, decay="compact", scale=2 * r, support=(x0 - r, x0 + r),
                          breakpoints=(x0 - r, x0 + r), focus=((x0, r / 4),), derivative=df,
                          name="odd-bump")


def _random_steps(param: BesselParameter, interval: Interval, seed: int, pieces: int) -> RadialFunction:
    rng = np.random.default_rng(seed)
    lo, hi = interval.lo, interval.hi
    cuts = np.sort(rng.uniform(lo, hi, pieces - 1))
    edges = np.concatenate([[lo], cuts, [hi]])
    vals = rng.standard_normal(pieces)
    d = param.dim
    seg = (edges[1:] ** d - edges[:-1] ** d) / d
    for _ in range(2):
        vals = vals - math.fsum(vals * seg) / math.fsum(seg)
    return piecewise_constant(edges, vals, name=f"random-{seed}")


def make_atom(param: BesselParameter, interval: Interval, shape: str = "two-step",
              p: Optional[float] = None, seed: int = 0, pieces: int = 4) -> Atom:
    """Atom of the given shape on ``interval``, scaled so the L2 size bound is attained."""
    p = param.p if p is None else p
    param.with_p(p)
    if shape == "two-step":
        f = _two_step(param, interval)
    elif shape == "odd-bump":
        f = _odd_bump(param, interval)
    elif shape == "random-seeded":
        if pieces < 2:
            raise AtomError("random-seeded atoms need at least two pieces")
        f = _random_steps(param, interval, seed, pieces)
    else:
        raise AtomError(f"unknown atom shape {shape!r}; use one of {ATOM_SHAPES}")
    _, _, l2sq = _moments(param, f, interval)
    if not l2sq > 0:
        raise AtomError("atom profile vanishes identically")
    bound = measure_of_interval(param, interval) ** (0.5 - 1 / p)
    f = f.scaled(bound / np.sqrt(l2sq))
    return Atom(interval, f, p, shape, validate_atom(param, f, interval, p))


def random_atom_family(param: BesselParameter, count: int, seed: int,
                       shapes: Sequence[str] = ("random-seeded",), p: Optional[float] = None,
                       center_range: tuple = (0.5, 4.0), radius_fraction: tuple = (0.1, 0.9)) -> list:
    """Seeded family of single atoms on random intervals."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        c = float(np.exp(rng.uniform(np.log(center_range[0]), np.log(center_range[1]))))
        r = float(c * rng.uniform(*radius_fraction))
        shape = shapes[i % len(shapes)]
        sub = int(rng.integers(0, 2 ** 31))
        pieces = int(rng.integers(2, 6))
        out.append(make_atom(param, Interval(c, r), shape, p, seed=sub, pieces=pieces))
    return out


# --------------------------------------------------------------------------
# atomic representations


@dataclass(frozen=True)
class AtomicRepresentation:
    coefficients: tuple
    atoms: tuple

    def __post_init__(self):
        if len(self.coefficients) != len(self.atoms):
            raise AtomError("coefficients and atoms differ in length")

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def p(self) -> float:
        return self.atoms[0].p if self.atoms else 1.0

    def function(self) -> RadialFunction:
        if not self.atoms:
            return zero_function()
        return linear_combination(self.coefficients, [a.profile for a in self.atoms])

    def scaled(self, c: float) -> "AtomicRepresentation":
        return AtomicRepresentation(tuple(c * a for a in self.coefficients), self.atoms)

    @classmethod
    def single(cls, atom: Atom, alpha: float = 1.0) -> "AtomicRepresentation":
        return cls((float(alpha),), (atom,))

    @classmethod
    def zero(cls) -> "AtomicRepresentation":
        return cls((), ())


def atomic_norm_upper(rep: AtomicRepresentation, p: Optional[float] = None) -> float:
    """``(sum |alpha_j|**p)**(1/p)``, an upper bound of the Hardy quasi-norm."""
    for a in rep.atoms:
        if not a.validation.passed:
            raise AtomError(f"invalid atom in representation: {a.validation}")
    if not rep.atoms:
        return 0.0
    p = rep.p if p is None else p
    c = np.abs(np.asarray(rep.coefficients, dtype=float))
    return float((c ** p).sum() ** (1 / p))


# --------------------------------------------------------------------------
# Riesz transform of atoms


def _atom_panels(atom: Atom, n: int = 32):
    f = atom.profile
    lo, hi = atom.interval.lo, atom.interval.hi
    pts = sorted({lo, hi} | {b for b in f.breakpoints if lo < b < hi})
    return _panel_nodes(pts, n)


def riesz_of_atom(param: BesselParameter, atom: Atom, x, scheme=None, near: float = 1.0):
    """``R(a)(x)``: plain quadrature at distance ``>= near * r`` from the support, else a principal value."""
    from .operators import riesz_transform
    from .quadrature import PrincipalValueScheme

    scheme = scheme if scheme is not None else PrincipalValueScheme()
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    I = atom.interval
    dist = np.maximum(I.lo - xs, xs - I.hi)
    far = dist >= near * I.radius
    out = np.empty(xs.shape)
    if np.any(far):
        y, w = _atom_panels(atom)
        w = w * y ** (2 * param.lam) * atom.profile(y)
        K = riesz_kernel(param, xs[far][:, None], y[None, :])
        out[far] = K @ w
    if np.any(~far):
        out[~far] = np.atleast_1d(riesz_transform(param, atom.profile, xs[~far], scheme))
    return float(out[0]) if np.ndim(x) == 0 else out


def riesz_atom_function(param: BesselParameter, atom: Atom, scheme=None) -> RadialFunction:
    """``R(a)`` as a radial function; far field ``~ x**(-2 lam - 3)`` by cancellation."""
    I = atom.interval
    jumps = [] if atom.profile.smooth else [b for b in atom.profile.breakpoints]
    return RadialFunction(lambda y: riesz_of_atom(param, atom, y, scheme), decay="custom",
                          exponent=2 * param.lam + 3, scale=I.hi,
                          breakpoints=tuple(sorted(set(atom.profile.breakpoints)
                                                   | {I.hi + I.radius, max(I.lo - I.radius, 0.0) or I.lo / 2})),
                          focus=tuple((b, I.radius * 2.0 ** -24) for b in jumps),
                          name=f"R({atom.profile.name})")


def _l2_on_pieces(param: BesselParameter, func: Callable, pieces: Sequence[tuple], n: int = 16) -> float:
    total = 0.0
    u, w = gauss_legendre(n)
    for a, b in pieces:
        if a <= 0:
            edges = np.concatenate([[0.0], b * 2.0 ** -np.arange(30, -1, -1)])
        else:
            m = max(1, int(np.ceil(np.log2(b / a) * 2)))
            edges = np.geomspace(a, b, m + 1)
        y, ww = _panel_nodes(edges, n)
        total += float((ww * y ** (2 * param.lam)) @ func(y) ** 2)
    return float(np.sqrt(total))


def k0_index(param: BesselParameter, interval: Interval) -> int:
    """Least ``K >= 1`` with ``R_k`` disjoint from ``2I`` for every ``k > K``."""
    ball = measure_ball(param, interval.center, measure_of_interval(param, interval))
    mB = ball_measure(param, ball)
    two = interval.dilate(2)
    lo2 = max(two.lo, 0.0)
    reach = max(float(measure_distance(param, lo2, interval.center)),
                float(measure_distance(param, two.hi, interval.center)))
    K = 1
    while 2.0 ** K * mB <= reach:
        K += 1
    return K


@dataclass
class MoleculeDecayReport:
    k: list
    norms: list
    slope: float
    required_slope: float
    k0: int
    far_points: list
    far_ratios: list
    far_constant: float
    refined_points: list = field(default_factory=list)
    refined_ratios: list = field(default_factory=list)

    @property
    def passed_slope(self) -> bool:
        return self.slope <= self.required_slope

    @property
    def passed_far_field(self) -> bool:
        r = np.asarray(self.far_ratios)
        # one constant covers every point and the ratio is not growing at the outermost points
        return bool(np.all(np.isfinite(r)) and r[-1] <= r[-2])

    @property
    def passed(self) -> bool:
        return self.passed_slope and self.passed_far_field

    def fitted_line(self) -> list:
        k = np.asarray(self.k, dtype=float)
        c = np.polyfit(k, np.log2(self.norms), 1)
        return list(np.polyval(c, k))

    def to_dict(self) -> dict:
        return dict(k=self.k, norms=self.norms, slope=self.slope, required_slope=self.required_slope,
                    k0=self.k0, far_points=self.far_points, far_ratios=self.far_ratios,
                    far_constant=self.far_constant, refined_points=self.refined_points,
                    refined_ratios=self.refined_ratios, passed=self.passed)


def riesz_molecule_decay(param: BesselParameter, atom: Atom, k_range: Optional[Sequence[int]] = None,
                         scheme=None, far_multiples: Sequence[float] = (3, 6, 12, 24, 48)) -> MoleculeDecayReport:
    """Annular L2 norms of ``R(a)`` beyond ``K0`` and the pointwise far-field bounds."""
    I = atom.interval
    lam, p = param.lam, atom.p
    K0 = k0_index(param, I)
    ks = list(k_range) if k_range is not None else list(range(K0 + 1, K0 + 9))
    if min(ks) <= K0:
        raise ValueError(f"k_range must start above K0={K0}")
    ball = measure_ball(param, I.center, measure_of_interval(param, I))
    Ra = lambda y: riesz_of_atom(param, atom, y, scheme)
    norms = [_l2_on_pieces(param, Ra, annulus(param, ball, k).pieces) for k in ks]
    slope = float(np.polyfit(ks, np.log2(norms), 1)[0])
    required = -(lam + 1.5) / (2 * lam + 1) + 0.1
    mI = measure_of_interval(param, I)
    scale = I.radius * mI ** (1 - 1 / p)
    xs = np.array([I.center + m * I.radius for m in far_multiples])
    vals = np.abs(Ra(xs))
    ratios = vals * np.abs(xs - I.center) ** (2 * lam + 2) / scale
    rep = MoleculeDecayReport(ks, [float(v) for v in norms], slope, float(required), K0,
                              [float(v) for v in xs], [float(v) for v in ratios], float(ratios.max()))
    if I.center >= 2 * I.radius:
        xr = np.concatenate([xs, [I.center - m * I.radius for m in far_multiples
                                  if I.center - m * I.radius > I.center / 2]])
        vr = np.abs(Ra(xr))
        rr = vr * np.abs(xr - I.center) ** 2 * xr ** lam * I.center ** lam / scale
        rep.refined_points = [float(v) for v in xr]
        rep.refined_ratios = [float(v) for v in rr]
    return rep


# --------------------------------------------------------------------------
# molecules


def eta_summable(eta: Callable[[int], float], p: float, k_max: int = 4000) -> bool:
    """Numerical summability of ``sum k eta_k`` (p = 1) or ``sum eta_k**p 2**(k(1-p))`` (p < 1)."""
    k = np.arange(1, k_max + 1, dtype=float)
    e = np.array([eta(int(j)) for j in k])
    if np.any(e < 0):
        return False
    with np.errstate(over="ignore", invalid="ignore"):
        terms = k * e if p == 1 else e ** p * 2.0 ** (k * (1 - p))
    if not np.all(np.isfinite(terms)):
        return False
    half, full = terms[: k_max // 2].sum(), terms.sum()
    return bool(full - half <= 1e-8 * max(full, 1e-300))


@dataclass(frozen=True)
class Molecule:
    """Profile with an L2 size bound, annular decay ``eta`` around ``ball`` and dm-mean zero.

    ``tail_constant`` and ``tail_exponent`` describe ``|M(x)| <= A x**(-q)``
    beyond the validated annuli and certify the remaining ones.
    """

    profile: RadialFunction
    ball: MeasureBall
    p: float
    eta: Callable[[int], float]
    tail_constant: Optional[float] = None
    tail_exponent: Optional[float] = None

    @property
    def summable(self) -> bool:
        return eta_summable(self.eta, self.p)


@dataclass
class MoleculeReport:
    size_ratio: float
    annulus_k: list
    annulus_ratios: list
    tail_bound: Optional[float]
    cancellation: float
    constant: float
    summable: bool

    @property
    def passed_size(self) -> bool:
        return self.size_ratio <= self.constant * (1 + 1e-10)

    @property
    def passed_annuli(self) -> bool:
        ok = max(self.annulus_ratios) <= self.constant * (1 + 1e-10)
        tail_ok = self.tail_bound is None or self.tail_bound <= self.constant
        return bool(ok and tail_ok)

    @property
    def passed_cancellation(self) -> bool:
        return self.cancellation <= 1e-8

    @property
    def passed(self) -> bool:
        return self.passed_size and self.passed_annuli and self.passed_cancellation and self.summable

    @property
    def required_constant(self) -> float:
        """Smallest constant for which size and annular bounds hold."""
        return float(max([self.size_ratio] + self.annulus_ratios + [self.tail_bound or 0.0]))

    def to_dict(self) -> dict:
        return dict(size_ratio=self.size_ratio, annulus_k=self.annulus_k,
                    annulus_ratios=self.annulus_ratios, tail_bound=self.tail_bound,
                    cancellation=self.cancellation, constant=self.constant,
                    summable=self.summable, required_constant=self.required_constant,
                    passed_size=self.passed_size,
                    passed_annuli=self.passed_annuli, passed_cancellation=self.passed_cancellation)


def _tail_certificate(param: BesselParameter, mol: Molecule, k_start: int, mB: float,
                      bound: float, k_stop: int = 200) -> Optional[float]:
    """Largest annulus ratio for ``k >= k_start`` implied by ``|M| <= A x**(-q)`` (closed form)."""
    if mol.tail_constant is None or mol.tail_exponent is None:
        return None
    A, q, lam = mol.tail_constant, mol.tail_exponent, param.lam
    e = 2 * lam - 2 * q + 1
    worst = 0.0
    for k in range(k_start, k_stop + 1):
        sq = 0.0
        for a, b in annulus(param, mol.ball, k).pieces:
            a = max(a, 1e-300)
            sq += A * A * ((b ** e - a ** e) / e if e != 0 else np.log(b / a))
        den = mol.eta(k) * 2.0 ** (-k / 2) * bound
        if den <= 0:
            return float("inf") if sq > 0 else worst
        worst = max(worst, np.sqrt(max(sq, 0.0)) / den)
    return float(worst)


def molecule_validate(param: BesselParameter, mol: Molecule, K: int = 12, constant: float = 1.0,
                      order: int = 10) -> MoleculeReport:
    """Size, annular decay for ``k <= K`` (plus the tail certificate) and cancellation.

    ``constant`` multiplies every right-hand side; ``1`` is the plain definition.
    """
    mB = ball_measure(param, mol.ball)
    bound = mB ** (0.5 - 1 / mol.p)
    grid = mol.profile.grid(param, order=order,
                            extra=[mol.ball.lo, mol.ball.hi, mol.ball.center])
    v = mol.profile(grid.nodes)
    l2 = float(np.sqrt(grid.weights @ (v * v)))
    mean = float(grid.weights @ v)
    l1 = float(grid.weights @ np.abs(v))
    ks = list(range(1, K + 1))
    ratios = []
    for k in ks:
        nrm = _l2_on_pieces(param, mol.profile, annulus(param, mol.ball, k).pieces)
        den = mol.eta(k) * 2.0 ** (-k / 2) * bound
        ratios.append(float(nrm / den) if den > 0 else (0.0 if nrm == 0 else float("inf")))
    tail = _tail_certificate(param, mol, K + 1, mB, bound)
    return MoleculeReport(l2 / bound, ks, ratios, tail, abs(mean) / l1 if l1 > 0 else 0.0,
                          float(constant), mol.summable)


def equal_measure_ball(param: BesselParameter, interval: Interval) -> MeasureBall:
    """Measure ball centered at ``x0`` with the same measure as ``interval``."""
    from .measure import antiderivative
    mI = measure_of_interval(param, interval)
    F0 = float(antiderivative(param, interval.center))
    rho = mI / 2 if F0 > mI / 2 else mI - F0
    return measure_ball(param, interval.center, rho)


def atom_as_molecule(param: BesselParameter, atom: Atom) -> Molecule:
    """An atom as a molecule on the equal-measure ball, ``eta_k = 2**(k/2)`` on annuli meeting ``I``."""
    I = atom.interval
    ball = equal_measure_ball(param, I)
    mB = ball_measure(param, ball)
    reach = max(float(measure_distance(param, I.lo, I.center)),
                float(measure_distance(param, I.hi, I.center)))

    def eta(k: int) -> float:
        if k - 1 > np.log2(reach / mB):
            return 0.0
        ann = annulus(param, ball, k)
        return 2.0 ** (k / 2) if any(a < I.hi and b > I.lo for a, b in ann.pieces) else 0.0

    return Molecule(atom.profile, ball, atom.p, eta)


def riesz_atom_molecule(param: BesselParameter, atom: Atom, scheme=None,
                        far_multiple: float = 48.0) -> Molecule:
    """``R(a)`` with ``eta_k = 2**(-k/(2 lam + 1))`` and a sampled far-field tail constant."""
    I = atom.interval
    ball = measure_ball(param, I.center, measure_of_interval(param, I))
    f = riesz_atom_function(param, atom, scheme)
    q = 2 * param.lam + 2
    xs = I.center + I.radius * far_multiple * 2.0 ** np.arange(0, 6)
    A = float(np.max(np.abs(f(xs)) * xs ** q))
    return Molecule(f, ball, atom.p, lambda k: 2.0 ** (-k / (2 * param.lam + 1)),
                    tail_constant=A, tail_exponent=q)


def riesz_atom_mean(param: BesselParameter, atom: Atom, scheme=None, order: int = 10) -> dict:
    """``int R(a) dm`` against its predicted value ``-c int a(y) log y dm(y)``.

    ``c = -(2 lam/pi) B(lam, 1/2)`` is the logarithmic coefficient of the
    adjoint kernel at infinity.
    """
    from .operators import adjoint_log_coefficient
    f = riesz_atom_function(param, atom, scheme)
    grid = f.grid(param, order=order)
    v = f(grid.nodes)
    y, w = _atom_panels(atom, 48)
    pred = -adjoint_log_coefficient(param) * float((w * y ** (2 * param.lam) * np.log(y)) @ atom.profile(y))
    return dict(mean=float(grid.weights @ v), l1=float(grid.weights @ np.abs(v)), predicted=pred)


# --------------------------------------------------------------------------
# equivalence of the maximal and square-function norms


def ratio_bands(functionals: Sequence[str], norms: np.ndarray) -> dict:
    """``{"A/B": (min, max)}`` of ``||A f|| / ||B f||`` over the rows of ``norms``."""
    bands = {}
    for i in range(len(functionals)):
        for j in range(i + 1, len(functionals)):
            r = norms[:, i] / norms[:, j]
            bands[f"{functionals[i]}/{functionals[j]}"] = (float(r.min()), float(r.max()))
    return bands


@dataclass
class EquivalenceReport:
    """Functional norms per family member and the pairwise ratio bands.

    Rows of ``norms`` follow ``indices``; zero representations and failed
    samples are listed separately and never enter a band.
    """

    functionals: tuple
    indices: list
    norms: np.ndarray
    atomic: list
    refined: Optional[np.ndarray] = None
    excluded: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    ceiling: float = 50.0
    band_tolerance: float = 0.10

    @property
    def bands(self) -> dict:
        return ratio_bands(self.functionals, self.norms)

    @property
    def refined_bands(self) -> Optional[dict]:
        return None if self.refined is None else ratio_bands(self.functionals, self.refined)

    @property
    def spreads(self) -> dict:
        return {k: hi / lo for k, (lo, hi) in self.bands.items()}

    @property
    def band_changes(self) -> dict:
        """Largest relative move of either band endpoint under refinement."""
        if self.refined is None:
            return {}
        ref = self.refined_bands
        return {k: max(abs(ref[k][0] - lo) / lo, abs(ref[k][1] - hi) / hi)
                for k, (lo, hi) in self.bands.items()}

    @property
    def passed_ceiling(self) -> bool:
        return len(self.indices) > 0 and all(s <= self.ceiling for s in self.spreads.values())

    @property
    def passed_refinement(self) -> bool:
        return all(c < self.band_tolerance for c in self.band_changes.values())

    @property
    def passed(self) -> bool:
        return self.passed_ceiling and self.passed_refinement

    def to_dict(self) -> dict:
        return {
            "functionals": list(self.functionals),
            "indices": list(self.indices),
            "norms": self.norms.tolist(),
            "refined_norms": None if self.refined is None else self.refined.tolist(),
            "atomic_upper": list(self.atomic),
            "bands": {k: list(v) for k, v in self.bands.items()},
            "spreads": self.spreads,
            "band_changes": self.band_changes,
            "excluded": list(self.excluded),
            "failures": [list(f) for f in self.failures],
            "ceiling": self.ceiling,
            "passed_ceiling": self.passed_ceiling,
            "passed_refinement": self.passed_refinement,
            "passed": self.passed,
        }


def functional_norms(transformer, rep: AtomicRepresentation) -> Optional[np.ndarray]:
    """Row of functional norms for one representation; ``None`` for the zero representation."""
    if not rep.atoms or not any(rep.coefficients):
        return None
    return transformer.transform([rep])[0]


def equivalence_experiment(param: BesselParameter, family: Sequence[AtomicRepresentation],
                           functionals: Sequence[str] = ("radial", "nontangential", "grand", "g",
                                                         "area"),
                           ceiling: float = 50.0, band_tolerance: float = 0.10,
                           refine_check: bool = True, estimator_params: Optional[dict] = None,
                           rows: Optional[Sequence] = None) -> EquivalenceReport:
    """Evaluate every functional on every family member and band the pairwise ratios.

    ``rows`` may carry precomputed ``(base, refined)`` results (``None`` for a
    zero representation, an exception message string for a failed sample),
    which is how parallel callers hand in their work.
    """
    from .estimators import HardyFunctionalTransformer

    family = list(family)
    if not family:
        raise ValueError("function family is empty")
    if rows is None:
        kw = dict(estimator_params or {}, lam=param.lam, p=param.p, functionals=tuple(functionals))
        base = HardyFunctionalTransformer(**kw).fit()
        fine = HardyFunctionalTransformer(**dict(kw, refine=2)).fit() if refine_check else None
        rows = []
        for rep in family:
            try:
                b = functional_norms(base, rep)
                r = None if (b is None or fine is None) else functional_norms(fine, rep)
                rows.append(None if b is None else (b, r))
            except Exception as exc:  # a failed sample must not abort the run
                rows.append(f"{type(exc).__name__}: {exc}")
    idx, base_rows, fine_rows, atomic, excluded, failures = [], [], [], [], [], []
    for i, (rep, row) in enumerate(zip(family, rows)):
        if row is None:
            excluded.append(i)
        elif isinstance(row, str):
            failures.append((i, row))
        else:
            idx.append(i)
            base_rows.append(row[0])
            fine_rows.append(row[1])
            atomic.append(atomic_norm_upper(rep))
    F = len(tuple(functionals))
    norms = np.array(base_rows, dtype=float).reshape(-1, F)
    refined = None
    if refine_check and fine_rows and all(r is not None for r in fine_rows):
        refined = np.array(fine_rows, dtype=float).reshape(-1, F)
    return EquivalenceReport(tuple(functionals), idx, norms, atomic, refined, excluded, failures,
                             ceiling, band_tolerance)


# --------------------------------------------------------------------------
# Riesz characterization: uniform bounds for the smoothed atom


def tabulated_riesz(param: BesselParameter, atom: Atom, per_octave: int = 24, inner: int = 160,
                    scheme=None) -> RadialFunction:
    """``R(a)`` from pointwise principal values on a fixed table, interpolated in ``log y``.

    Below the table ``R(a)`` vanishes linearly; above it the far-field power
    ``y**(-2 lam - 3)`` takes over.
    """
    from scipy.interpolate import CubicSpline

    I = atom.interval
    lo, hi = max(I.lo, I.center * 1e-3), I.hi
    octaves = np.arange(np.floor(np.log2(lo)) - 10, np.ceil(np.log2(hi)) + 16 + 1e-9,
                        1.0 / per_octave)
    near = np.linspace(max(I.lo - I.radius, lo / 2), I.hi + I.radius, inner)
    y = np.unique(np.concatenate([2.0 ** octaves, near]))
    v = np.asarray(riesz_of_atom(param, atom, y, scheme), dtype=float)
    spline = CubicSpline(np.log(y), v)
    y0, yN, v0, vN = y[0], y[-1], v[0], v[-1]
    q = 2 * param.lam + 3

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape)
        a, b = s < y0, s > yN
        mid = ~(a | b)
        out[a] = v0 * s[a] / y0
        out[b] = vN * (yN / s[b]) ** q
        out[mid] = spline(np.log(s[mid]))
        return out

    bps = tuple(sorted({b for b in atom.profile.breakpoints if b > 0} | {I.hi + I.radius}))
    return RadialFunction(f, decay="custom", exponent=q, scale=I.hi, breakpoints=bps,
                          focus=((I.center, I.radius / 4),), name=f"R({atom.profile.name})")


def smoothed_norm_grid(param: BesselParameter, f: RadialFunction, delta: float, order: int = 8,
                       refine: int = 1):
    """x-grid for ``L^p`` norms of ``f # phi_delta``: jump layers of width ``delta``, tail ``x**(-2 lam - 2)``."""
    from .hankel import focus_points

    pts = [p for p in f.grid_points() if p > 0]
    lo, hi = f.support if f.support is not None else (min(pts), max(pts))
    pts += [lo / 2, 2 * hi, 4 * hi, delta, 2 * delta, 4 * delta]
    if not f.smooth:
        for b in f.breakpoints:
            if b > 0 and delta < b:
                pts += focus_points(b, delta)
    return build_radial_grid(param, pts, scale=max(hi, delta), decay="custom",
                             exponent=2 * param.lam + 2, order=order, refine=refine)


@dataclass
class RieszCharacterizationReport:
    """Per ``delta``: ``||P_d f||_p``, ``||R(P_d f)||_p`` and ``||P_d(R f)||_p``."""

    deltas: list
    smoothed: list
    riesz_of_smoothed: list
    smoothed_riesz: list
    atomic_upper: float
    ceiling: float
    majorization: Optional[dict] = None
    refined: Optional[dict] = None
    pv_flags: list = field(default_factory=list)
    stability_tolerance: float = 0.05

    @property
    def bound(self) -> float:
        return self.ceiling * self.atomic_upper

    @property
    def maxima(self) -> dict:
        return {"smoothed": max(self.smoothed, default=0.0),
                "riesz_of_smoothed": max(self.riesz_of_smoothed, default=0.0),
                "smoothed_riesz": max(self.smoothed_riesz, default=0.0)}

    @property
    def passed_uniform(self) -> bool:
        m = self.maxima
        return (not self.pv_flags and m["smoothed"] + m["riesz_of_smoothed"] <= self.bound
                and m["smoothed_riesz"] <= self.bound)

    @property
    def refinement_changes(self) -> dict:
        if self.refined is None:
            return {}
        out = {}
        for key in ("smoothed", "riesz_of_smoothed", "smoothed_riesz"):
            a, b = np.asarray(getattr(self, key)), np.asarray(self.refined[key])
            scale = np.maximum(np.abs(a), 1e-300)
            out[key] = float(np.max(np.abs(b - a) / scale)) if a.size else 0.0
        return out

    @property
    def passed_stability(self) -> bool:
        return all(c < self.stability_tolerance for c in self.refinement_changes.values())

    @property
    def passed_majorization(self) -> bool:
        return self.majorization is None or bool(self.majorization["passed"])

    @property
    def passed(self) -> bool:
        return self.passed_uniform and self.passed_stability and self.passed_majorization

    def to_dict(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "smoothed": list(self.smoothed),
            "riesz_of_smoothed": list(self.riesz_of_smoothed),
            "smoothed_riesz": list(self.smoothed_riesz),
            "atomic_upper": self.atomic_upper,
            "ceiling": self.ceiling,
            "bound": self.bound,
            "maxima": self.maxima,
            "refined": self.refined,
            "refinement_changes": self.refinement_changes,
            "majorization": self.majorization,
            "pv_flags": list(self.pv_flags),
            "passed_uniform": self.passed_uniform,
            "passed_stability": self.passed_stability,
            "passed_majorization": self.passed_majorization,
            "passed": self.passed,
        }


def characterization_quantities(param: BesselParameter, f: RadialFunction, delta: float,
                                phi: RadialFunction, riesz_f: Optional[RadialFunction],
                                order: int = 8, refine: int = 1) -> tuple:
    """``(||P_d f||_p, ||R(P_d f)||_p, ||P_d(R f)||_p)`` at one ``delta``.

    ``P_d`` is ``# phi_delta``. With the Poisson profile ``R(P_d f) = Q_d f``;
    otherwise it is a principal value of the smoothed function.
    """
    from .operators import conjugate_extension, phi_transform, smoothed_riesz
    from .quadrature import lp_from_values

    p = param.p
    grid = smoothed_norm_grid(param, f, delta, order, refine)
    x = grid.nodes
    d = np.full(x.shape, float(delta))
    inner = order + 2 * (refine - 1)
    u = phi_transform(param, f, phi, d, x, inner, refine)
    if phi.name == "poisson":
        v = conjugate_extension(param, f, d, x, inner, refine)
    else:
        res = smoothed_riesz(param, f, phi, delta, x, route="pv", order=inner)
        v = np.atleast_1d(res)
    w = (np.zeros(x.shape) if riesz_f is None
         else phi_transform(param, riesz_f, phi, d, x, inner, refine, route="kernel"))
    return (lp_from_values(grid, u, p), lp_from_values(grid, v, p), lp_from_values(grid, w, p))


def default_majorization_points(atom: Atom) -> list:
    """Nine ``(t, x)`` pairs: three heights times three positions around the support."""
    I = atom.interval
    return [(t * I.radius, x) for t in (0.25, 1.0, 4.0) for x in (I.center - I.radius / 2,
                                                                  I.center + I.radius / 2,
                                                                  I.hi + 2 * I.radius)]


def riesz_characterization_experiment(param: BesselParameter, rep: AtomicRepresentation,
                                      deltas: Sequence[float] = tuple(2.0 ** j for j in range(-4, 5)),
                                      phi: Optional[RadialFunction] = None, ceiling: float = 50.0,
                                      order: int = 8, refine_check: bool = True,
                                      majorization_delta: Optional[float] = 1.0,
                                      majorization_p: Optional[float] = None,
                                      majorization_points: Optional[Sequence[tuple]] = None,
                                      majorization_tol: float = 1e-5,
                                      rows: Optional[Sequence] = None) -> RieszCharacterizationReport:
    """Uniform-in-``delta`` bounds for the smoothed function and its Riesz transforms.

    The third quantity smooths the pointwise principal values of ``R f``,
    tabulated once. ``rows`` may carry precomputed per-``delta`` results
    ``((A, B, C), refined or None)`` or an error message string.
    """
    from .functions import poisson_profile
    from .operators import poisson_majorization_check

    phi = phi if phi is not None else poisson_profile(param)
    deltas = [float(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas):
        raise ValueError("deltas must be a nonempty set of positive numbers")
    upper = atomic_norm_upper(rep)
    if not rep.atoms or not any(rep.coefficients):
        z = [0.0] * len(deltas)
        return RieszCharacterizationReport(deltas, z, z, z, upper, ceiling)
    f = rep.function()
    if rows is None:
        rf = riesz_representation_function(param, rep)
        rows = []
        for d in deltas:
            try:
                base = characterization_quantities(param, f, d, phi, rf, order, 1)
                fine = (characterization_quantities(param, f, d, phi, rf, order, 2)
                        if refine_check else None)
                rows.append((base, fine))
            except Exception as exc:  # reported per delta
                rows.append(f"{type(exc).__name__}: {exc}")
    flags = [[d, r] for d, r in zip(deltas, rows) if isinstance(r, str)]
    nan = (float("nan"),) * 3
    rows = [(nan, nan) if isinstance(r, str) else r for r in rows]
    A = [float(r[0][0]) for r in rows]
    B = [float(r[0][1]) for r in rows]
    C = [float(r[0][2]) for r in rows]
    refined = None
    if refine_check and all(r[1] is not None for r in rows):
        refined = {"smoothed": [float(r[1][0]) for r in rows],
                   "riesz_of_smoothed": [float(r[1][1]) for r in rows],
                   "smoothed_riesz": [float(r[1][2]) for r in rows]}
    major = None
    if majorization_delta is not None and phi.name == "poisson":
        pm = majorization_p if majorization_p is not None else 2 * param.lam / (2 * param.lam + 1)
        pts = majorization_points or default_majorization_points(rep.atoms[0])
        rpt = poisson_majorization_check(param, f, majorization_delta, pm, pts,
                                         tol=majorization_tol, order=order + 2)
        major = rpt.to_dict()
    return RieszCharacterizationReport(deltas, A, B, C, upper, ceiling, major, refined, flags)


def riesz_representation_function(param: BesselParameter, rep: AtomicRepresentation
                                   ) -> Optional[RadialFunction]:
    """``R f = sum alpha_j R(a_j)`` from tabulated principal values."""
    if not rep.atoms:
        return None
    parts = [tabulated_riesz(param, a) for a in rep.atoms]
    if len(parts) == 1 and rep.coefficients[0] == 1.0:
        return parts[0]
    return linear_combination(rep.coefficients, parts, name="R(f)")
