"""Regenerate ``tests/data/goldens.json`` from independent mpmath oracles.

Run from the repository root: ``python tests/oracles/make_goldens.py``.
Nothing here imports the package; every value comes from a definition
evaluated at 30 digits or from a closed form.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30
OUT = Path(__file__).resolve().parents[1] / "data" / "goldens.json"
LAMS = ["0.3", "0.5", "1", "2.7"]


def angular_mass(lam):
    return mp.quad(lambda th: mp.sin(th) ** (2 * lam - 1), [0, mp.pi / 2, mp.pi])


def _angular(lam, f):
    return mp.quad(lambda th: f(th) * mp.sin(th) ** (2 * lam - 1), [0, mp.pi / 4, mp.pi / 2, mp.pi])


def poisson(lam, t, x, y):
    return 2 * lam * t / mp.pi * _angular(lam, lambda th: (x * x + y * y + t * t - 2 * x * y * mp.cos(th)) ** (-lam - 1))


def conjugate(lam, t, x, y):
    return -2 * lam / mp.pi * _angular(
        lam, lambda th: (x - y * mp.cos(th)) * (x * x + y * y + t * t - 2 * x * y * mp.cos(th)) ** (-lam - 1))


def heat_profile(lam, z):
    return mp.mpf(2) ** ((1 - 2 * lam) / 2) * mp.exp(-z * z / 2) / mp.gamma(lam + mp.mpf(1) / 2)


def heat_angular(lam, t, x, y):
    """``tau_x W_s(y)`` with ``s = sqrt(2 t)`` from the translation integral."""
    s = mp.sqrt(2 * t)
    c = 1 / angular_mass(lam)
    return c * s ** (-(2 * lam + 1)) * _angular(
        lam, lambda th: heat_profile(lam, mp.sqrt(x * x + y * y - 2 * x * y * mp.cos(th)) / s))


def heat_bessel(lam, t, x, y):
    """Closed form ``(2t)**-1 (xy)**(1/2 - lam) exp(-(x^2+y^2)/(4t)) I_{lam-1/2}(xy/(2t))``."""
    return (xy := x * y) ** (mp.mpf(1) / 2 - lam) / (2 * t) * mp.exp(-(x * x + y * y) / (4 * t)) \
        * mp.besseli(lam - mp.mpf(1) / 2, xy / (2 * t))


def q0_lambda1(a, b):
    """``Q_0(a, b)`` at ``lam = 1`` in closed form."""
    return -2 / mp.pi * (mp.log(abs((a + b) / (a - b))) / (2 * b * a * a) + 1 / (a * (a * a - b * b)))


def adjoint_truncated_lambda1(x, L):
    """``PV int_0^L Q_0(y, x) y^2 dy`` at ``lam = 1``; depends on ``M = L/x`` only."""
    M = L / x
    return -2 / mp.pi * ((1 + M) * mp.log(1 + M) / 2 + (1 - M) * mp.log(M - 1) / 2 + mp.log(M * M - 1) / 2)


def riesz_indicator_lambda1(x, lo=1, hi=2):
    """``PV int_lo^hi Q_0(x, y) y^2 dy`` at ``lam = 1``.

    ``y^2 Q_0(x, y) = -(2/pi)[y log|(x+y)/(x-y)| / (2 x^2) + h(y)/(x - y)]`` with
    ``h(y) = y^2 / (x (x + y))``; the pole is removed by subtracting ``h(x)``.
    """
    h = lambda y: y * y / (x * (x + y))
    logpart = mp.quad(lambda y: y * mp.log(abs((x + y) / (x - y))) / (2 * x * x),
                      [lo, x, hi] if lo < x < hi else [lo, hi])
    if lo < x < hi:
        smooth = mp.quad(lambda y: (h(y) - h(x)) / (x - y), [lo, x, hi])
        pv = h(x) * mp.log((x - lo) / (hi - x))
    else:
        smooth = mp.quad(lambda y: h(y) / (x - y), [lo, hi])
        pv = 0
    return -2 / mp.pi * (logpart + smooth + pv)


def poisson_indicator_lambda1(t, x, lo=1, hi=2):
    k = lambda y: 4 * t / (mp.pi * ((x - y) ** 2 + t * t) * ((x + y) ** 2 + t * t))
    return mp.quad(lambda y: k(y) * y * y, [lo, hi])


def conjugate_indicator(lam, t, x, lo=1, hi=2):
    return mp.quad(lambda y: conjugate(lam, t, x, y) * y ** (2 * lam), [lo, (lo + hi) / 2, hi])


def two_step_lambda1():
    lo, mid, hi = mp.mpf(1), mp.mpf("1.5"), mp.mpf(2)
    mL, mR = (mid ** 3 - lo ** 3) / 3, (hi ** 3 - mid ** 3) / 3
    mI = mL + mR
    s = 1 / (mI * mp.sqrt(mL * mR))
    # the same atom written as c * (4.625, -2.375)
    return {"scale": s, "A": s * mR, "B": -s * mL, "multiplier": s * mR / mp.mpf("4.625")}


def f(v):
    return float(v)


def main():
    g = {}
    g["angular_mass"] = {lam: f(angular_mass(mp.mpf(lam))) for lam in LAMS}
    pts = [("1", "1", "1"), ("2", "1", "3"), ("0.25", "0.5", "0.75"), ("4", "3", "0.5"),
           ("0.125", "2", "2.1")]
    g["poisson_kernel"] = [{"lam": lam, "t": t, "x": x, "y": y,
                            "value": f(poisson(mp.mpf(lam), mp.mpf(t), mp.mpf(x), mp.mpf(y)))}
                           for lam in LAMS for (t, x, y) in pts]
    g["conjugate_kernel"] = [{"lam": lam, "t": t, "x": x, "y": y,
                              "value": f(conjugate(mp.mpf(lam), mp.mpf(t), mp.mpf(x), mp.mpf(y)))}
                             for lam in LAMS for (t, x, y) in pts]
    g["riesz_kernel_lambda1"] = [{"x": a, "y": b, "value": f(q0_lambda1(mp.mpf(a), mp.mpf(b)))}
                                 for a, b in (("1", "2"), ("2", "1"), ("0.5", "0.51"), ("3", "0.1"))]
    g["heat_kernel"] = []
    for lam in ("0.5", "1", "2.7"):
        for (t, x, y) in (("0.5", "1", "1"), ("1", "0.5", "2"), ("0.1", "2", "2.2")):
            L, T, X, Y = (mp.mpf(v) for v in (lam, t, x, y))
            a, b = heat_angular(L, T, X, Y), heat_bessel(L, T, X, Y)
            g["heat_kernel"].append({"lam": lam, "t": t, "x": x, "y": y, "value": f(b),
                                     "angular_minus_bessel": f(a - b)})
    g["q0_origin_lambda1_x1"] = f(-4 / mp.pi)
    g["adjoint_one_lambda1"] = f(-2 / mp.pi)
    g["adjoint_fixed_cutoff_lambda1"] = [{"x": x, "cutoff": "64",
                                          "value": f(adjoint_truncated_lambda1(mp.mpf(x), mp.mpf(64)))}
                                         for x in ("0.5", "1", "2", "4")]
    g["riesz_indicator_lambda1"] = [{"x": x, "value": f(riesz_indicator_lambda1(mp.mpf(x)))}
                                    for x in ("0.5", "1.5", "1.25", "3", "10")]
    g["poisson_indicator_lambda1"] = [{"t": t, "x": x, "value": f(poisson_indicator_lambda1(mp.mpf(t), mp.mpf(x)))}
                                      for t, x in (("1", "1"), ("0.25", "1.5"), ("2", "0.5"))]
    g["conjugate_indicator"] = [{"lam": lam, "t": "1", "x": "1.5",
                                 "value": f(conjugate_indicator(mp.mpf(lam), 1, mp.mpf("1.5")))}
                                for lam in ("0.5", "1", "2.7")]
    g["two_step_lambda1"] = {k: f(v) for k, v in two_step_lambda1().items()}
    g["beta_half"] = {lam: f(mp.beta(mp.mpf(lam), mp.mpf(1) / 2)) for lam in LAMS}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(g, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
