"""Arithmetic of the power-weighted measure ``dm(x) = x**(2*lam) dx`` on (0, inf).

Everything here is closed form: the antiderivative ``y**(2*lam+1)/(2*lam+1)``
is used for interval measures, the measure distance and ball endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class ParameterError(ValueError):
    """Raised when a parameter falls outside its admissible window."""


@dataclass(frozen=True)
class BesselParameter:
    """Order ``lam > 0`` of the Bessel operator plus an exponent ``p``.

    ``p`` must lie in the window ``((2 lam + 1)/(2 lam + 2), 1]``.
    """

    lam: float
    p: float = 1.0

    def __post_init__(self):
        lam, p = float(self.lam), float(self.p)
        if not np.isfinite(lam) or lam <= 0:
            raise ParameterError(f"lambda > 0 violated: lambda = {lam!r}")
        lower = (2 * lam + 1) / (2 * lam + 2)
        if not (lower < p <= 1.0):
            raise ParameterError(
                f"(2*lambda+1)/(2*lambda+2) < p <= 1 violated: "
                f"{lower!r} < {p!r} <= 1 is false"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> float:
        """Homogeneous dimension ``2 lam + 1`` of the measure."""
        return 2 * self.lam + 1

    @property
    def p_lower(self) -> float:
        return (2 * self.lam + 1) / (2 * self.lam + 2)

    def with_p(self, p: float) -> "BesselParameter":
        return BesselParameter(self.lam, p)


@dataclass(frozen=True)
class Interval:
    """``I(x0, r) = (x0 - r, x0 + r) intersected with (0, inf)``."""

    center: float
    radius: float

    def __post_init__(self):
        if not (self.center > 0 and self.radius > 0):
            raise ParameterError(
                f"interval needs center > 0 and radius > 0, got {self.center}, {self.radius}"
            )

    @property
    def lo(self) -> float:
        return max(self.center - self.radius, 0.0)

    @property
    def hi(self) -> float:
        return self.center + self.radius

    @classmethod
    def from_endpoints(cls, lo: float, hi: float) -> "Interval":
        if not (0 <= lo < hi):
            raise ParameterError(f"need 0 <= lo < hi, got ({lo}, {hi})")
        return cls(0.5 * (lo + hi), 0.5 * (hi - lo))

    def dilate(self, k: float) -> "Interval":
        """``kI``: same center, radius scaled by k."""
        return Interval(self.center, k * self.radius)

    def __contains__(self, x) -> bool:
        return self.lo < x < self.hi


@dataclass(frozen=True)
class MeasureBall:
    """Ball ``{x : d(x, x0) < r}`` for the measure distance, with its endpoints."""

    center: float
    radius: float
    lo: float
    hi: float


@dataclass(frozen=True)
class Annulus:
    """Dyadic annulus ``R_k`` as at most two disjoint half-open pieces.

    Each piece is ``(a, b)`` with ``a < b``; the left piece is absent once it
    would extend past the origin.
    """

    k: int
    pieces: tuple

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.pieces:
            out |= (x >= a) & (x < b)
        return out


def antiderivative(param: BesselParameter, y):
    """``y**(2 lam + 1) / (2 lam + 1)``."""
    y = np.asarray(y, dtype=float)
    return y ** param.dim / param.dim


def inverse_antiderivative(param: BesselParameter, v):
    """Solve ``y**(2 lam + 1)/(2 lam + 1) = v`` for ``y >= 0``.

    A closed-form root, then one Newton polish step on ``y**d - d*v`` which
    brings the relative error to the rounding floor even for non-integer d.
    """
    v = np.asarray(v, dtype=float)
    d = param.dim
    target = np.maximum(d * v, 0.0)
    y = target ** (1.0 / d)
    pos = y > 0
    if np.any(pos):
        yp = y[pos] if y.ndim else y
        tp = target[pos] if y.ndim else target
        yp = yp - (yp ** d - tp) / (d * yp ** (d - 1))
        if y.ndim:
            y = y.copy()
            y[pos] = yp
        else:
            y = yp
    return y


def measure_between(param: BesselParameter, lo, hi):
    """``m((lo, hi))`` for arrays of endpoints with ``0 <= lo <= hi``."""
    lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
    hi = np.asarray(hi, dtype=float)
    d = param.dim
    # factored form keeps relative accuracy for thin intervals far from 0
    with np.errstate(invalid="ignore", divide="ignore"):
        safe_hi = np.where(hi > 0, hi, 1.0)
        small = hi - lo < 1e-3 * hi
        direct = (hi ** d - lo ** d) / d
        # hi^d (1 - (lo/hi)^d) through expm1/log1p of the exact gap
        thin = -(hi ** d) * np.expm1(d * np.log1p(-(hi - lo) / safe_hi)) / d
    return np.where(small & (hi > 0), thin, direct)


def measure_of_interval(param: BesselParameter, interval: Interval) -> float:
    """Exact ``m(I) = (hi**(2 lam+1) - lo**(2 lam+1))/(2 lam + 1)``."""
    return float(measure_between(param, interval.lo, interval.hi))


def measure_I(param: BesselParameter, x, r):
    """Vectorized ``m(I(x, r))``."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    return measure_between(param, np.maximum(x - r, 0.0), x + r)


@dataclass
class ComparabilityReport:
    ratio_min: float
    ratio_max: float
    lower: float
    upper: float
    passed: bool
    n_samples: int


def comparability_check(param: BesselParameter, samples: Iterable[Sequence[float]]) -> ComparabilityReport:
    """Doubling check ``2 <= m(I(x, 2r))/m(I(x, r)) <= 2**(2 lam + 1)``."""
    arr = np.asarray(list(samples), dtype=float)
    if arr.size == 0:
        raise ValueError("comparability_check needs at least one (x, r) sample")
    arr = arr.reshape(-1, 2)
    if np.any(arr <= 0):
        raise ValueError("samples must be positive (x, r) pairs")
    x, r = arr[:, 0], arr[:, 1]
    ratios = measure_I(param, x, 2 * r) / measure_I(param, x, r)
    lower, upper = 2.0, 2.0 ** param.dim
    slack = 1e-12
    passed = bool(np.all(ratios >= lower * (1 - slack)) and np.all(ratios <= upper * (1 + slack)))
    return ComparabilityReport(float(ratios.min()), float(ratios.max()), lower, upper, passed, len(ratios))


def measure_distance(param: BesselParameter, x, x0):
    """``d(x, x0) = |int_x^x0 y**(2 lam) dy|``."""
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    out = measure_between(param, np.minimum(x, x0), np.maximum(x, x0))
    return float(out) if out.ndim == 0 else out


def measure_ball(param: BesselParameter, x0: float, r: float) -> MeasureBall:
    """Endpoints of ``{x > 0 : d(x, x0) < r}``.

    The right endpoint solves ``F(y) = F(x0) + r`` and the left ``F(y) = F(x0) - r``
    (clipped to 0 when negative), where ``F`` is the antiderivative.
    """
    if not (x0 > 0 and r > 0):
        raise ParameterError("measure_ball needs x0 > 0 and r > 0")
    F0 = float(antiderivative(param, x0))
    # relative form keeps thin balls far from the origin resolvable
    hi = float(x0 * np.exp(np.log1p(r / F0) / param.dim))
    lo = float(x0 * np.exp(np.log1p(-r / F0) / param.dim)) if F0 > r else 0.0
    return MeasureBall(float(x0), float(r), lo, hi)


def ball_measure(param: BesselParameter, ball: MeasureBall) -> float:
    return float(measure_between(param, ball.lo, ball.hi))


def core_radius(param: BesselParameter, ball: MeasureBall) -> float:
    """``m(I_d)``, the unit in which the dyadic annuli are measured."""
    return ball_measure(param, ball)


def annulus(param: BesselParameter, ball: MeasureBall, k: int) -> Annulus:
    """``R_k = {x : 2**(k-1) m(B) <= d(x, x0) < 2**k m(B)}`` for ``k >= 1``.

    The region ``d(x, x0) < m(B)`` (the core) is not an annulus; annuli start
    at k = 1.
    """
    if int(k) != k or k < 1:
        raise ParameterError(f"annulus index must be an integer >= 1, got {k}")
    k = int(k)
    mB = ball_measure(param, ball)
    F0 = float(antiderivative(param, ball.center))
    inner, outer = 2.0 ** (k - 1) * mB, 2.0 ** k * mB
    right = (float(inverse_antiderivative(param, F0 + inner)),
             float(inverse_antiderivative(param, F0 + outer)))
    pieces = []
    if F0 - inner > 0:
        a = float(inverse_antiderivative(param, F0 - outer)) if F0 - outer > 0 else 0.0
        b = float(inverse_antiderivative(param, F0 - inner))
        if b > a:
            pieces.append((a, b))
    pieces.append(right)
    return Annulus(k, tuple(pieces))


def core_region(param: BesselParameter, ball: MeasureBall) -> tuple:
    """``{x : d(x, x0) < m(B)}`` as an open interval ``(lo, hi)``."""
    b = measure_ball(param, ball.center, ball_measure(param, ball))
    return (b.lo, b.hi)
