"""Compiled band integrals for ``Phi_t(chi_(0, b))`` when ``lam`` is a small integer.

Then ``I_x(lam, lam)`` is a polynomial and the whole quadrature fuses into one loop.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numba import njit

POISSON, HEAT = 0, 1


@njit(cache=True)
def _ipow(v, m):
    r = 1.0
    for _ in range(m):
        r *= v
    return r


@njit(cache=True)
def _band(b, t, x, xi, w, n, coeffs, kind, C, out, scale):
    two_lam = 2 * n
    power = n + 1
    dim = 2 * n + 1
    for i in range(t.shape[0]):
        ti, xv = t[i], x[i]
        z0 = abs(xv - b)
        z1 = xv + b
        L = z1 - z0
        inv_t = 1.0 / ti
        inv_4x = 0.25 / xv
        acc = 0.0
        for k in range(xi.shape[0]):
            z = z0 + L * xi[k]
            fr = (z + b - xv) * (z1 - z) * inv_4x / z
            if fr < 0.0:
                fr = 0.0
            elif fr > 1.0:
                fr = 1.0
            if n == 1:
                T = fr
            else:
                om = 1.0 - fr
                T = 0.0
                for j in range(n, 2 * n):
                    T += coeffs[j] * _ipow(fr, j) * _ipow(om, 2 * n - 1 - j)
            u = z * inv_t
            if kind == POISSON:
                ph = C / _ipow(1.0 + u * u, power)
            else:
                ph = C * np.exp(-0.5 * u * u)
            acc += w[k] * ph * T * _ipow(z, two_lam)
        out[i] += scale * acc * L * _ipow(inv_t, dim)


def supported(lam: float, name: str) -> bool:
    n = int(round(lam))
    return n == lam and 1 <= n <= 8 and name in ("poisson", "heat")


def band_integral(lam: float, name: str, C: float, b: float, t: np.ndarray, x: np.ndarray,
                  xi: np.ndarray, w: np.ndarray, out: np.ndarray, scale: float) -> None:
    """Add ``scale * int_{|x-b|}^{x+b} phi_t(z) tau_x chi_(0,b)(z) dm(z)`` into ``out``."""
    n = int(round(lam))
    coeffs = np.array([float(comb(2 * n - 1, j)) for j in range(2 * n)])
    kind = POISSON if name == "poisson" else HEAT
    _band(float(b), t, x, xi, w, n, coeffs, kind, float(C), out, float(scale))
