"""Verification suites: each one is a list of small picklable tasks plus an ordered merge.

A task is ``(kind, args)`` with JSON-friendly ``args``. ``run_task`` turns it
into ``{"checks": [...], "series": {...}, "diagnostics": [...]}``; the merge
keeps task order, so the report does not depend on how tasks were scheduled.
"""

from __future__ import annotations

import math

import numpy as np

from .config import RunConfig

SUITES = ("kernels", "aoti", "operators", "molecules", "equivalence", "riesz-char")

_OPS = {"<=": lambda a, b: a <= b, "<": lambda a, b: a < b, ">=": lambda a, b: a >= b,
        ">": lambda a, b: a > b}


def check(name: str, anchor: str, lhs_label: str, lhs: float, relation: str, rhs: float,
          rhs_label: str = "", **values) -> dict:
    """One check record: ``lhs relation rhs`` with both sides named and evaluated."""
    lhs, rhs = float(lhs), float(rhs)
    ok = bool(np.isfinite(lhs) and np.isfinite(rhs) and _OPS[relation](lhs, rhs))
    label = f"{lhs_label} {relation} {rhs_label or repr(rhs)}"
    return {"name": name, "anchor": anchor, "inequality": label, "lhs": lhs, "rhs": rhs,
            "passed": ok, "values": values}


def _result(checks=(), series=None, diagnostics=()) -> dict:
    return {"checks": list(checks), "series": dict(series or {}), "diagnostics": list(diagnostics)}


def _param(lam: float, p: float = 1.0):
    from .measure import BesselParameter
    return BesselParameter(lam, p)


# --------------------------------------------------------------------------
# kernels


def _task_normalization(cfg: RunConfig, lam: float) -> dict:
    from scipy.integrate import quad

    from .quadrature import angular_mass, build_angular_rule

    a = 2 * lam - 1
    # u = sin(theta) on each half: 2 int_0^1 u**a (1 - u)**(-1/2) (1 + u)**(-1/2) du,
    # with the algebraic endpoint factors carried by the QAWS weight
    val, _ = quad(lambda u: (1 + u) ** -0.5, 0.0, 1.0, weight="alg", wvar=(a, -0.5),
                  epsabs=0.0, epsrel=2e-14, limit=200)
    val *= 2
    exact = angular_mass(lam)
    rule = build_angular_rule(_param(lam), cfg["quadrature"]["angular_nodes"]).total
    tol = cfg["tolerances"]["normalization"]
    return _result([
        check(f"angular normalization lambda={lam}", "angular normalization of the translation",
              "|int_0^pi sin^(2lam-1) - Gamma(lam)sqrt(pi)/Gamma(lam+1/2)| / exact",
              abs(val - exact) / exact, "<=", tol, computed=val, exact=exact,
              rule_total=rule, rule_error=abs(rule - exact) / exact),
    ])


def _task_kernel_mass(cfg: RunConfig, lam: float, profile: str) -> dict:
    from .functions import profile as make_profile
    from .kernels import kernel_mass
    from .quadrature import integrate_radial

    P = _param(lam)
    phi = make_profile(P, profile)
    norm = integrate_radial(P, phi)
    ks = cfg["kernels"]
    worst, where = 0.0, None
    for i in ks["t_exponents"]:
        for j in ks["x_exponents"]:
            t, x = 2.0 ** i, 2.0 ** j
            err = abs(kernel_mass(P, phi, t, x) - norm)
            if err >= worst:
                worst, where = err, (t, x)
    tol = cfg["tolerances"]["kernel_mass"]
    return _result([
        check(f"kernel mass lambda={lam} {profile}", "kernel mass equals profile mass",
              "max |int Phi_t(x,.) dm - ||phi||_1|", worst, "<=", tol * norm, "tol*||phi||_1",
              profile_norm=norm, worst_point=list(where),
              n_t=len(ks["t_exponents"]), n_x=len(ks["x_exponents"])),
    ])


def _task_closed_form(cfg: RunConfig) -> dict:
    from .kernels import poisson_kernel, poisson_kernel_closed_form

    P = _param(1.0)
    n = cfg["kernels"]["closed_form_points"]
    vals = 2.0 ** np.linspace(-2, 2, n)
    t, x, y = (a.ravel() for a in np.meshgrid(vals, vals, vals, indexing="ij"))
    got = poisson_kernel(P, t, x, y)
    ref = poisson_kernel_closed_form(t, x, y)
    rel = float(np.max(np.abs(got - ref) / np.abs(ref)))
    tol = cfg["tolerances"]["closed_form"]
    spots = []
    for (tt, xx, yy), exact, label in (((1, 1, 1), 4 / (5 * math.pi), "4/(5 pi)"),
                                       ((2, 1, 3), 1 / (20 * math.pi), "1/(20 pi)")):
        v = float(poisson_kernel(P, tt, xx, yy))
        spots.append(check(f"Poisson kernel at (t,x,y)=({tt},{xx},{yy})",
                           "closed-form Poisson kernel at lambda=1",
                           f"|P_t(x,y) - {label}| / {label}", abs(v - exact) / exact, "<=", tol,
                           computed=v, exact=exact))
    return _result([
        check("Poisson kernel closed form lambda=1", "closed-form Poisson kernel at lambda=1",
              "max |quadrature - 4t/(pi((x-y)^2+t^2)((x+y)^2+t^2))| / closed form", rel, "<=", tol,
              grid_points=int(t.size)),
        *spots,
    ])


def _task_kernel_slice(cfg: RunConfig) -> dict:
    from .functions import profile as make_profile
    from .kernels import kernel_slice_grid, profile_kernel

    P = cfg.param
    phi = make_profile(P, cfg["functionals"]["profile"])
    t, x = cfg["kernels"]["slice_t"], cfg["kernels"]["slice_x"]
    y = kernel_slice_grid(P, phi, t, x).nodes
    y = y[y <= x + 40 * t]
    k = profile_kernel(P, phi)(t, x, y)
    rows = [[float(a), float(b)] for a, b in zip(y, k)]
    return _result(series={"kernel-slice": {"columns": ["y", "P_t(x,y)"], "rows": rows,
                                            "t": t, "x": x}})


# --------------------------------------------------------------------------
# identity approximation


def _task_aoti(cfg: RunConfig, lam: float, profile: str) -> dict:
    from .functions import profile as make_profile
    from .kernels import aoti_verify

    P = _param(lam)
    phi = make_profile(P, profile)
    rep = aoti_verify(P, phi, cfg["aoti"]["samples"], cfg.seed)
    growth = cfg["tolerances"]["aoti_growth"]
    out = []
    for key, c in (("i", rep.C_i), ("ii", rep.C_ii), ("iv", rep.C_iv)):
        ratio = rep.refinement_ratios[key]
        out.append(check(f"identity approximation ({key}) lambda={lam} {profile}",
                         f"size/smoothness bound ({key}) of Phi_t/||phi||_1",
                         f"C_{key}(2N)/C_{key}(N)", ratio, "<", growth,
                         constant=c, constant_half=getattr(rep, f"C_{key}_half"),
                         samples=rep.n_samples, rejected=rep.n_rejected))
    out.append(check(f"identity approximation normalization lambda={lam} {profile}",
                     "kernel mass equals profile mass",
                     "max |int Phi_t(x,.) dm / ||phi||_1 - 1|", rep.normalization_residual, "<=",
                     cfg["tolerances"]["kernel_mass"]))
    return _result(out)


# --------------------------------------------------------------------------
# operators: PDE structure, subharmonicity, regularized R~(1)

PDE_POINTS = [(t, x) for t in (0.5, 1.0, 2.0) for x in (0.75, 1.5, 3.0)]
SUBHARMONIC_POINTS = [(t, x) for t in (0.1, 0.25, 0.5, 1.0, 2.0)
                      for x in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 3.0)]


def _reference_atom(P, shape: str = "two-step"):
    from .hardy import make_atom
    from .measure import Interval
    return make_atom(P, Interval(1.5, 0.5), shape)


def _task_pde(cfg: RunConfig, lam: float) -> dict:
    from .operators import (bessel_laplace_residual, convergence_ratio, cr_residual,
                            cr_residual_swapped, extension_field)

    P = _param(lam)
    atom = _reference_atom(P)
    F = extension_field(P, atom.profile, cfg["quadrature"]["order"] + 2)
    h = cfg["operators"]["step"]
    tol = cfg["tolerances"]
    residuals = {
        "Bessel-harmonic equation for u": lambda t, x, s: bessel_laplace_residual(P, F.u, t, x, s),
        "Cauchy-Riemann first equation": lambda t, x, s: cr_residual(P, F, t, x, s)[0],
        "Cauchy-Riemann second equation": lambda t, x, s: cr_residual(P, F, t, x, s)[1],
    }
    out = []
    for label, res in residuals.items():
        ratios = [convergence_ratio(lambda s: res(t, x, s), h) for t, x in PDE_POINTS]
        out.append(check(f"{label} order-2 convergence lambda={lam}",
                         f"{label} for u = P_t a, v = Q_t a",
                         "min_points |r(h)|/|r(h/2)|", min(ratios), ">=", tol["cr_ratio_min"],
                         ratios=ratios, h=h, points=[list(q) for q in PDE_POINTS]))
        out.append(check(f"{label} order-2 convergence upper lambda={lam}",
                         f"{label} for u = P_t a, v = Q_t a",
                         "max_points |r(h)|/|r(h/2)|", max(ratios), "<=", tol["cr_ratio_max"],
                         h=h))
    printed = [abs(cr_residual_swapped(P, F, t, x, h)) for t, x in PDE_POINTS]
    diag = [{"name": f"printed Cauchy-Riemann second equation lambda={lam}",
             "note": "v_t - u_x - (2 lam/x) v does not vanish for the Poisson pair",
             "max_residual": max(printed), "h": h}]
    return _result(out, diagnostics=diag)


def _task_subharmonic(cfg: RunConfig, lam: float) -> dict:
    from .operators import extension_field, subharmonicity_check

    P = _param(lam)
    atom = _reference_atom(P)
    F = extension_field(P, atom.profile, cfg["quadrature"]["order"] + 2)
    floor = cfg["tolerances"]["subharmonic_floor"]
    out = []
    for p, label in ((2 * lam / (2 * lam + 1), "threshold exponent 2lam/(2lam+1)"), (1.0, "p=1")):
        rep = subharmonicity_check(P, F, p, SUBHARMONIC_POINTS, threshold=floor)
        margin = min(v + t for v, t in zip(rep.values, rep.tolerances))
        out.append(check(f"subharmonicity {label} lambda={lam}",
                         "sub-Bessel-harmonicity of (u^2+v^2)^(p/2) for p >= 2lam/(2lam+1)",
                         "min_points (L[F^p] + tol)", margin, ">=", 0.0,
                         p=p, min_value=rep.min_value, points=len(rep.points),
                         skipped=len(rep.skipped)))
    ctrl = subharmonicity_check(P, F, lam / (2 * lam + 1), SUBHARMONIC_POINTS, threshold=floor)
    out.append(check(f"subharmonicity sharpness witness lambda={lam}",
                     "sharpness of the exponent 2lam/(2lam+1)",
                     "#points with L[F^p] < -tol at p=lam/(2lam+1)", len(ctrl.negative_points),
                     ">=", 1, "1", min_value=ctrl.min_value,
                     negative_points=[list(q) for q in ctrl.negative_points]))
    return _result(out)


def _task_maximal_profile(cfg: RunConfig) -> dict:
    from .functions import profile as make_profile
    from .operators import (ConeSpec, TimeGrid, area_function, build_dictionary, g_function,
                            grand_maximal_lower, nontangential_maximal, radial_maximal)

    P = cfg.param
    atom = _reference_atom(P)
    phi = make_profile(P, cfg["functionals"]["profile"])
    tg, cs = cfg["time_grid"], cfg["cone"]
    tf = cfg["test_function"]
    tgrid = TimeGrid(tg["k_min"], tg["k_max"], tg["subdivisions"])
    cone = ConeSpec(cs["aperture"], cs["points"])
    order = cfg["quadrature"]["order"]
    kr = (tg["k_min"], tg["k_max"])
    x = 2.0 ** np.linspace(-2, 4, 25)
    f = atom.profile
    rad = radial_maximal(P, f, phi, x, tgrid, order)
    nt = nontangential_maximal(P, f, phi, x, tgrid, cone, order)
    gr = grand_maximal_lower(P, f, x, build_dictionary(P, phi, tf["beta"], tf["gamma"]), phi, order)
    g = g_function(P, f, x, kr, phi, order)
    S = area_function(P, f, x, kr, cone, phi, order=order)
    rows = [[float(v) for v in r] for r in zip(x, rad, nt, gr, g, S)]
    gap = float(np.min(nt - rad))
    out = [check(f"nontangential dominates radial lambda={P.lam}",
                 "cone contains its axis", "min_x (Phi*(a) - Phi+(a))", gap, ">=", 0.0,
                 points=len(x)),
           check(f"dictionary lower bound is comparable to radial lambda={P.lam}",
                 "normalized kernel slices are test functions",
                 "min_x G_dict(a)/Phi+(a)", float(np.min(gr / rad)), ">", 0.0,
                 max_ratio=float(np.max(gr / rad)))]
    series = {"maximal-profile": {"columns": ["x", "radial", "nontangential", "grand_lower", "g",
                                              "area"], "rows": rows, "atom": "two-step on I(1.5,0.5)"}}
    return _result(out, series=series)


def _pv_scheme(cfg: RunConfig):
    from .quadrature import PrincipalValueScheme
    s = cfg["pv"]
    return PrincipalValueScheme(delta0=s["delta0"], levels=s["levels"], richardson=s["richardson"],
                                subtraction=s["subtraction"])


def _task_adjoint_one(cfg: RunConfig) -> dict:
    from .operators import riesz_adjoint_fixed_cutoff, riesz_adjoint_of_one

    P = cfg.param
    xs = [float(x) for x in cfg["operators"]["adjoint_points"]]
    scheme = _pv_scheme(cfg)
    rep = riesz_adjoint_of_one(P, xs, scheme)
    out = [check(f"regularized R~(1) constancy lambda={P.lam}",
                 "R~(1) is constant (scale-covariant regularization)",
                 "max_{i,j} |R~(1)(x_i) - R~(1)(x_j)|", rep.max_pairwise_deviation, "<=",
                 cfg["tolerances"]["constancy"], **rep.to_dict())]
    L = 64.0
    fixed = riesz_adjoint_fixed_cutoff(P, xs, L, scheme)
    c = rep.log_coefficient
    # V_L(x) ~ R~(1) - c log(x/L): a fixed cutoff drifts with x
    pred = np.array([-c * math.log(x / xs[0]) for x in xs])
    drift = float(np.max(fixed) - np.min(fixed))
    out.append(check(f"fixed-cutoff values drift lambda={P.lam}",
                     "log divergence of the adjoint kernel at infinity",
                     "max_{i,j} |V_L(x_i) - V_L(x_j)|", drift, ">",
                     cfg["tolerances"]["constancy"], cutoff=L, values=list(map(float, fixed)),
                     predicted_differences=list(map(float, pred)),
                     observed_differences=list(map(float, fixed - fixed[0])),
                     log_coefficient=c))
    return _result(out)


# --------------------------------------------------------------------------
# molecules


def mid_window_p(lam: float) -> float:
    """A ``p`` strictly inside ``((2 lam + 1)/(2 lam + 2), 1]``."""
    return 0.9 + 0.1 * (2 * lam + 1) / (2 * lam + 2)


def _task_molecule(cfg: RunConfig, lam: float, p: float, shape: str, emit: bool) -> dict:
    from .hardy import (atom_as_molecule, make_atom, molecule_validate, riesz_atom_mean,
                        riesz_molecule_decay)
    from .measure import Interval

    P = _param(lam, p)
    atom = make_atom(P, Interval(1.5, 0.5), shape, p=p)
    rep = riesz_molecule_decay(P, atom, scheme=_pv_scheme(cfg))
    required = -(lam + 1.5) / (2 * lam + 1) + cfg["tolerances"]["slope_margin"]
    tag = f"lambda={lam} p={p:.6g} {shape}"
    out = [
        check(f"molecule decay slope {tag}", "annular L2 decay of R(a) beyond K0",
              "fitted log2 slope of ||R(a) chi_Rk||_2", rep.slope, "<=", required,
              "-(lam+3/2)/(2lam+1) + margin", k=rep.k, norms=rep.norms, k0=rep.k0),
        check(f"far-field bound {tag}", "pointwise far-field bound for R(a)",
              "ratio at outermost point", rep.far_ratios[-1], "<=", rep.far_ratios[-2],
              "ratio at next point", points=rep.far_points, ratios=rep.far_ratios,
              constant=rep.far_constant),
    ]
    if rep.refined_ratios:
        right = rep.refined_ratios[:len(rep.far_points)]
        out.append(check(f"refined far-field bound {tag}", "refined far-field bound when x0 >= 2r",
                         "ratio at outermost point", right[-1], "<=", max(rep.refined_ratios),
                         "recorded constant", points=rep.refined_points,
                         ratios=rep.refined_ratios, constant=max(rep.refined_ratios)))
    mol = molecule_validate(P, atom_as_molecule(P, atom))
    failed = sum(not ok for ok in (mol.passed_size, mol.passed_annuli, mol.passed_cancellation))
    out.append(check(f"atom is a molecule {tag}", "atoms are molecules with compact eta",
                     "#failed molecule conditions", failed, "<=", 0, **mol.to_dict()))
    series, diag = {}, []
    if emit:
        series["annulus-decay"] = {"columns": ["k", "log2_norm", "fitted_line"],
                                   "rows": [[k, math.log2(n), f] for k, n, f in
                                            zip(rep.k, rep.norms, rep.fitted_line())],
                                   "label": tag}
    if p == 1.0:
        m = riesz_atom_mean(P, atom, _pv_scheme(cfg))
        diag.append({"name": f"mean of R(a) {tag}",
                     "note": "int R(a) dm equals -c int a log y dm, not zero", **m})
    return _result(out, series, diag)


# --------------------------------------------------------------------------
# equivalence of functionals


def _family(cfg: RunConfig):
    from .hardy import AtomicRepresentation, random_atom_family

    a = cfg["atoms"]
    atoms = random_atom_family(cfg.param, a["count"], cfg.seed, tuple(a["shapes"]),
                               center_range=(a["center_min"], a["center_max"]))
    return [AtomicRepresentation.single(x) for x in atoms]


def _estimator_params(cfg: RunConfig) -> dict:
    tg, cone, tf, q = cfg["time_grid"], cfg["cone"], cfg["test_function"], cfg["quadrature"]
    return dict(lam=cfg.param.lam, p=cfg.param.p, functionals=tuple(cfg["functionals"]["names"]),
                phi=cfg["functionals"]["profile"], beta=tf["beta"], gamma=tf["gamma"],
                epsilon=tf["epsilon"], k_min=tg["k_min"], k_max=tg["k_max"],
                subdivisions=tg["subdivisions"], aperture=cone["aperture"],
                cone_points=cone["points"], order=q["order"])


def _task_equivalence_atom(cfg: RunConfig, index: int) -> dict:
    from .estimators import HardyFunctionalTransformer
    from .hardy import functional_norms

    rep = _family(cfg)[index]
    kw = _estimator_params(cfg)
    try:
        base = functional_norms(HardyFunctionalTransformer(**kw).fit(), rep)
        fine = None
        if base is not None and cfg["quadrature"]["refine_check"]:
            fine = functional_norms(HardyFunctionalTransformer(**dict(kw, refine=2)).fit(), rep)
        row = None if base is None else [list(map(float, base)),
                                         None if fine is None else list(map(float, fine))]
    except Exception as exc:  # a failed sample is recorded, not fatal
        row = f"{type(exc).__name__}: {exc}"
    return dict(_result(), row={"index": index, "value": row})


def _task_equivalence_homogeneity(cfg: RunConfig, alpha: float = 2.0) -> dict:
    from .estimators import HardyFunctionalTransformer
    from .hardy import functional_norms

    rep = _family(cfg)[0]
    T = HardyFunctionalTransformer(**_estimator_params(cfg)).fit()
    a, b = functional_norms(T, rep), functional_norms(T, rep.scaled(alpha))
    dev = float(np.max(np.abs(b - alpha * a) / np.abs(alpha * a)))
    return _result([check("functional norms are homogeneous", "homogeneity of the functionals",
                          f"max |N({alpha} f) - {alpha} N(f)| / ({alpha} N(f))", dev, "<=", 1e-10,
                          alpha=alpha)])


def _finish_equivalence(cfg: RunConfig, results: list) -> dict:
    from .hardy import equivalence_experiment

    rows = [r["row"] for r in results if "row" in r]
    rows.sort(key=lambda r: r["index"])
    family = _family(cfg)
    vals = [None if r["value"] is None else (r["value"] if isinstance(r["value"], str)
                                            else (np.array(r["value"][0]),
                                                  None if r["value"][1] is None
                                                  else np.array(r["value"][1])))
            for r in rows]
    tol = cfg["tolerances"]
    rep = equivalence_experiment(cfg.param, family, tuple(cfg["functionals"]["names"]),
                                 ceiling=tol["ceiling"], band_tolerance=tol["band_change"],
                                 refine_check=cfg["quadrature"]["refine_check"], rows=vals)
    out = []
    spreads, changes, bands = rep.spreads, rep.band_changes, rep.bands
    for pair, spread in spreads.items():
        out.append(check(f"equivalence band {pair}", "equivalence of maximal and square functions",
                         "max/min of the ratio over the family", spread, "<=", tol["ceiling"],
                         "ceiling", band=list(bands[pair])))
        if pair in changes:
            out.append(check(f"equivalence band refinement {pair}",
                             "equivalence of maximal and square functions",
                             "relative band change under doubled density", changes[pair], "<",
                             tol["band_change"]))
    out.append(check("equivalence samples evaluated", "equivalence of maximal and square functions",
                     "#failed samples", len(rep.failures), "<=", 0, failures=rep.failures))
    series = {"ratio-bands": {"columns": ["functional_pair", "min_ratio", "max_ratio"],
                              "rows": [[k, lo, hi] for k, (lo, hi) in bands.items()]}}
    return _result(out, series, [{"name": "equivalence report", **rep.to_dict()}])


# --------------------------------------------------------------------------
# Riesz characterization


def _char_atom(cfg: RunConfig):
    from .hardy import AtomicRepresentation, make_atom
    from .measure import Interval
    P = cfg.param
    return AtomicRepresentation.single(make_atom(P, Interval(1.5, 0.5), cfg["riesz_char"]["shape"]))


def _task_riesz_delta(cfg: RunConfig, delta: float) -> dict:
    from .functions import profile as make_profile
    from .hardy import characterization_quantities, riesz_representation_function, smoothed_norm_grid
    from .operators import phi_transform

    P = cfg.param
    rep = _char_atom(cfg)
    f = rep.function()
    phi = make_profile(P, cfg["functionals"]["profile"])
    order = cfg["quadrature"]["order"]
    try:
        rf = riesz_representation_function(P, rep)
        base = characterization_quantities(P, f, delta, phi, rf, order, 1)
        fine = (characterization_quantities(P, f, delta, phi, rf, order, 2)
                if cfg["quadrature"]["refine_check"] else None)
        value = [list(map(float, base)), None if fine is None else list(map(float, fine))]
    except Exception as exc:  # reported per delta
        value = f"{type(exc).__name__}: {exc}"
    grid = smoothed_norm_grid(P, f, delta, order + 2)
    u = phi_transform(P, f, phi, np.full(grid.nodes.shape, delta), grid.nodes, order + 2)
    mass = float(grid.weights @ u)
    return dict(_result(), row={"delta": float(delta), "value": value, "mass": mass})


def _task_riesz_majorization(cfg: RunConfig) -> dict:
    from .hardy import default_majorization_points
    from .operators import poisson_majorization_check

    P = cfg.param
    rep = _char_atom(cfg)
    d = cfg["riesz_char"]["majorization_delta"]
    p = 2 * P.lam / (2 * P.lam + 1)
    tol = cfg["tolerances"]["majorization"]
    m = poisson_majorization_check(P, rep.function(), d, p, default_majorization_points(rep.atoms[0]),
                                   tol=tol, order=cfg["quadrature"]["order"] + 2)
    return dict(_result([check(f"Poisson majorization delta={d}",
                               "Poisson majorization of F_delta^p",
                               "max_points (F_delta(t,x)^p - P_t(F_delta(0,.)^p)(x))", max(m.gaps),
                               "<=", tol, report=m.to_dict())]), majorization=m.to_dict())


def _finish_riesz(cfg: RunConfig, results: list) -> dict:
    from .hardy import riesz_characterization_experiment

    rows = sorted((r["row"] for r in results if "row" in r), key=lambda r: r["delta"])
    deltas = [r["delta"] for r in rows]
    vals = [r["value"] if isinstance(r["value"], str) else (tuple(r["value"][0]),
            None if r["value"][1] is None else tuple(r["value"][1])) for r in rows]
    tol = cfg["tolerances"]
    rep = riesz_characterization_experiment(cfg.param, _char_atom(cfg), deltas, ceiling=tol["ceiling"],
                                            refine_check=cfg["quadrature"]["refine_check"],
                                            majorization_delta=None, rows=vals)
    rep.stability_tolerance = tol["stability"]
    m = rep.maxima
    out = [
        check("uniform bound for P_d f and R(P_d f)", "uniform boundedness of the smoothed pair",
              "max_d ||P_d f||_p + max_d ||R(P_d f)||_p", m["smoothed"] + m["riesz_of_smoothed"],
              "<=", rep.bound, "ceiling * atomic upper bound", deltas=deltas,
              smoothed=rep.smoothed, riesz_of_smoothed=rep.riesz_of_smoothed),
        check("uniform bound for P_d(R f)", "uniform boundedness of the smoothed Riesz transform",
              "max_d ||P_d(R f)||_p", m["smoothed_riesz"], "<=", rep.bound,
              "ceiling * atomic upper bound", smoothed_riesz=rep.smoothed_riesz),
        check("principal values per delta", "uniform boundedness of the smoothed pair",
              "#deltas with failed principal values", len(rep.pv_flags), "<=", 0,
              failures=rep.pv_flags),
        check("cancellation of the smoothed atom", "cancellation survives smoothing",
              "max_d |int P_d a dm|", max(abs(r["mass"]) for r in rows), "<=", 1e-8,
              masses=[r["mass"] for r in rows]),
    ]
    for key, change in rep.refinement_changes.items():
        out.append(check(f"refinement stability {key}", "uniform boundedness of the smoothed pair",
                         "max_d relative change under doubled density", change, "<",
                         tol["stability"]))
    for r in results:
        out.extend(r["checks"])
    return _result(out, diagnostics=[{"name": "riesz characterization report", **rep.to_dict()}])


# --------------------------------------------------------------------------
# dispatch

TASKS = {
    "normalization": _task_normalization, "kernel_mass": _task_kernel_mass,
    "closed_form": _task_closed_form, "kernel_slice": _task_kernel_slice, "aoti": _task_aoti,
    "pde": _task_pde, "subharmonic": _task_subharmonic, "adjoint_one": _task_adjoint_one,
    "maximal_profile": _task_maximal_profile,
    "molecule": _task_molecule, "equivalence_atom": _task_equivalence_atom,
    "equivalence_homogeneity": _task_equivalence_homogeneity, "riesz_delta": _task_riesz_delta,
    "riesz_majorization": _task_riesz_majorization,
}

FINISH = {"equivalence": _finish_equivalence, "riesz-char": _finish_riesz}


def suite_tasks(cfg: RunConfig, suite: str) -> list:
    """Ordered ``(kind, kwargs)`` tasks making up ``suite``."""
    if suite == "kernels":
        k = cfg["kernels"]
        return ([("normalization", {"lam": lam}) for lam in k["lambdas"]]
                + [("kernel_mass", {"lam": lam, "profile": ph}) for lam in k["lambdas"]
                   for ph in ("poisson", "heat")]
                + [("closed_form", {}), ("kernel_slice", {})])
    if suite == "aoti":
        a = cfg["aoti"]
        return [("aoti", {"lam": lam, "profile": ph}) for lam in a["lambdas"] for ph in a["profiles"]]
    if suite == "operators":
        o = cfg["operators"]
        return ([("pde", {"lam": lam}) for lam in o["lambdas"]]
                + [("subharmonic", {"lam": lam}) for lam in o["subharmonic_lambdas"]]
                + [("adjoint_one", {}), ("maximal_profile", {})])
    if suite == "molecules":
        m = cfg["molecules"]
        tasks = []
        for lam in m["lambdas"]:
            for p in (1.0, mid_window_p(lam)):
                for shape in m["shapes"]:
                    emit = lam == cfg.param.lam and p == 1.0 and shape == m["shapes"][0]
                    tasks.append(("molecule", {"lam": lam, "p": p, "shape": shape, "emit": emit}))
        return tasks
    if suite == "equivalence":
        return ([("equivalence_atom", {"index": i}) for i in range(cfg["atoms"]["count"])]
                + [("equivalence_homogeneity", {})])
    if suite == "riesz-char":
        return ([("riesz_delta", {"delta": 2.0 ** j}) for j in cfg["riesz_char"]["delta_exponents"]]
                + [("riesz_majorization", {})])
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")


def run_task(cfg_data: dict, task: tuple) -> dict:
    """Run one task; errors become a failing record instead of aborting the suite."""
    kind, kwargs = task
    cfg = RunConfig(cfg_data)
    try:
        return TASKS[kind](cfg, **kwargs)
    except Exception as exc:
        return _result([check(f"task {kind} {kwargs}", "task completed", "#errors", 1, "<=", 0,
                              error=f"{type(exc).__name__}: {exc}")])


def merge(cfg: RunConfig, suite: str, results: list) -> dict:
    """Ordered merge of task results into ``{"checks", "series", "diagnostics"}``."""
    if suite in FINISH:
        plain = [r for r in results if "row" not in r and "majorization" not in r]
        special = [r for r in results if "row" in r or "majorization" in r]
        done = FINISH[suite](cfg, special)
        results = [done] + plain
    body = _result()
    for r in results:
        body["checks"].extend(r["checks"])
        body["series"].update(r["series"])
        body["diagnostics"].extend(r["diagnostics"])
    return body
