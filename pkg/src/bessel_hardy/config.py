"""Run configuration: a TOML file with a few flat sections.

Every key has a default, so a file holding only ``lambda = 1`` is valid.
Unknown keys, wrong types and parameter-window violations are rejected at
load time.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .measure import BesselParameter, ParameterError

FUNCTIONAL_NAMES = ["radial", "nontangential", "grand", "g", "area"]

DEFAULTS: dict = {
    "lambda": 1.0,
    "p": 1.0,
    "seed": 0,
    "quadrature": {"order": 8, "angular_nodes": 64, "refine_check": True},
    "time_grid": {"k_min": -10, "k_max": 10, "subdivisions": 4},
    "cone": {"aperture": 1.0, "points": 9},
    "pv": {"delta0": 0.5, "levels": 7, "richardson": True, "subtraction": True},
    "test_function": {"epsilon": 0.9, "beta": 0.5, "gamma": 0.5},
    "atoms": {"count": 20, "shapes": ["random-seeded"],
              "center_min": 0.5, "center_max": 4.0},
    "functionals": {"names": list(FUNCTIONAL_NAMES), "profile": "poisson"},
    "tolerances": {
        "normalization": 1e-12, "kernel_mass": 1e-7, "closed_form": 1e-10, "aoti_growth": 2.0,
        "cr_ratio_min": 3.5, "cr_ratio_max": 4.5, "slope_margin": 0.1, "constancy": 1e-4,
        "ceiling": 50.0, "band_change": 0.10, "stability": 0.05, "majorization": 1e-5,
        "subharmonic_floor": 1e-8,
    },
    "kernels": {"lambdas": [0.3, 0.5, 1.0, 2.7], "t_exponents": list(range(-6, 7)),
                "x_exponents": list(range(-3, 4)), "closed_form_points": 5,
                "slice_t": 0.5, "slice_x": 1.0},
    "aoti": {"samples": 10000, "profiles": ["poisson", "heat"], "lambdas": [0.3, 0.5, 1.0, 2.7]},
    "operators": {"lambdas": [0.5, 1.0, 2.7], "subharmonic_lambdas": [0.5, 1.0], "step": 0.04,
                  "adjoint_points": [0.5, 1.0, 2.0, 4.0]},
    "molecules": {"lambdas": [0.5, 1.0, 2.7], "shapes": ["two-step", "odd-bump"]},
    "riesz_char": {"delta_exponents": list(range(-4, 5)), "shape": "odd-bump",
                   "majorization_delta": 1.0},
    "output": {"dir": "bessel-hardy-out"},
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the file position or the failed inequality."""


def _kind(v: Any) -> str:
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, (int, float)):
        return "number"
    if isinstance(v, str):
        return "string"
    if isinstance(v, list):
        return "array"
    return type(v).__name__


def _merge(defaults: dict, given: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        path = f"{where}.{key}" if where else key
        if key not in defaults:
            raise ConfigError(f"unknown key {path!r}")
        ref = defaults[key]
        if isinstance(ref, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path!r} must be a section")
            out[key] = _merge(ref, value, path)
            continue
        if _kind(value) != _kind(ref):
            raise ConfigError(f"{path!r} must be a {_kind(ref)}, got {_kind(value)}")
        if isinstance(ref, int) and not isinstance(ref, bool) and isinstance(value, float):
            if value != int(value):
                raise ConfigError(f"{path!r} must be an integer, got {value!r}")
            value = int(value)
        out[key] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one run; ``data`` mirrors the TOML layout with defaults filled."""

    data: dict

    def __getitem__(self, key: str):
        return self.data[key]

    @property
    def param(self) -> BesselParameter:
        return BesselParameter(self.data["lambda"], self.data["p"])

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    def with_seed(self, seed: int) -> "RunConfig":
        d = copy.deepcopy(self.data)
        d["seed"] = int(seed)
        return RunConfig(d)

    def section(self, name: str) -> dict:
        return self.data[name]


def validate(data: dict) -> RunConfig:
    try:
        param = BesselParameter(data["lambda"], data["p"])
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    tf = data["test_function"]
    eps, beta, gamma = tf["epsilon"], tf["beta"], tf["gamma"]
    if not 0 < eps < 1:
        raise ConfigError(f"0 < epsilon < 1 violated: epsilon = {eps!r}")
    low = param.dim * (1 / param.p - 1)
    for name, v in (("beta", beta), ("gamma", gamma)):
        if not low < v < eps:
            raise ConfigError(f"(2*lambda+1)*(1/p-1) < {name} < epsilon violated: "
                              f"{low!r} < {v!r} < {eps!r} is false")
    tg = data["time_grid"]
    if tg["k_min"] >= tg["k_max"] or tg["subdivisions"] < 1:
        raise ConfigError("time_grid: k_min < k_max and subdivisions >= 1 violated")
    bad = [n for n in data["functionals"]["names"] if n not in FUNCTIONAL_NAMES]
    if bad:
        raise ConfigError(f"unknown functionals {bad}; choose from {FUNCTIONAL_NAMES}")
    if data["functionals"]["profile"] not in ("poisson", "heat"):
        raise ConfigError("functionals.profile must be 'poisson' or 'heat'")
    if data["atoms"]["count"] < 1:
        raise ConfigError("atoms.count >= 1 violated")
    if data["cone"]["aperture"] <= 0:
        raise ConfigError("cone.aperture > 0 violated")
    for lam in data["kernels"]["lambdas"] + data["aoti"]["lambdas"] + data["operators"]["lambdas"] \
            + data["molecules"]["lambdas"]:
        if not lam > 0:
            raise ConfigError(f"lambda > 0 violated: lambda = {lam!r}")
    return RunConfig(data)


def config_from_mapping(given: dict) -> RunConfig:
    return validate(_merge(DEFAULTS, given, ""))


def load_config(path) -> RunConfig:
    """Parse and validate a TOML config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    try:
        given = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return config_from_mapping(given)
