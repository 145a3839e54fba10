"""Experiment configuration: versioned JSON schema with hard key validation.

Unknown keys anywhere in the document are errors naming the offending key
path; silent typos would otherwise change what an experiment means.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .coefficients import BUILTIN_COEFFICIENTS
from .errors import ConfigError, ResolutionError
from .kernels import (
    KernelSpec,
    make_core_tail_kernel,
    make_pareto_kernel,
    make_truncated_kernel,
)

SCHEMA_VERSION = 1

KERNEL_BUILDERS = {
    "pareto": (make_pareto_kernel, {"r0"}),
    "core_tail": (make_core_tail_kernel, {"core_mass"}),
    "truncated_pareto": (make_truncated_kernel, {"r0", "cutoff"}),
}

COEFFICIENT_PARAMS = {
    "constant": {"value"},
    "product_sine": set(),
    "cosine_difference": set(),
    "slow_modulated": set(),
}

# profile name -> allowed params
RHS_PROFILES = {
    "gaussian": {"sigma", "center", "amplitude"},
    "bump": {"radius", "center", "amplitude"},
    "zero": set(),
}

_TOP_KEYS = {
    "schema_version", "kernel", "alpha", "coefficient", "m", "grid",
    "eps_list", "rhs", "hypotheses", "diagnostics", "output_dir", "tolerances",
}
_GRID_KEYS = {"R", "N", "dimension"}
_DIAG_KEYS = {"regions", "cubes", "translation_shifts", "exterior"}
_TOL_KEYS = {"solver_rel_tol", "lambda_s", "mass_tol"}
_HYP_NAMES = {"H1", "H2", "H3", "H4"}


def _require_keys(obj: dict, allowed: set, path: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"expected an object at {path or 'top level'}")
    for key in obj:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key: {where}")


def _need(obj: dict, key: str, path: str = ""):
    if key not in obj:
        where = f"{path}.{key}" if path else key
        raise ConfigError(f"missing required config key: {where}")
    return obj[key]


@dataclass(frozen=True)
class RhsSpec:
    name: str
    params: dict = field(default_factory=dict)

    def support_radius(self) -> float:
        """Nominal support radius: exact for bump, 4 sigma for gaussian."""
        if self.name == "zero":
            return 0.0
        if self.name == "bump":
            return abs(self.params.get("center", 0.0)) + self.params.get("radius", 1.0)
        sigma = self.params.get("sigma", 0.5)
        return abs(self.params.get("center", 0.0)) + 4.0 * sigma

    def build(self):
        name, prm = self.name, self.params
        if name == "zero":
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        amp = prm.get("amplitude", 1.0)
        c = prm.get("center", 0.0)
        if name == "gaussian":
            sig = prm.get("sigma", 0.5)
            return lambda x: amp * np.exp(-0.5 * ((np.asarray(x, dtype=float) - c) / sig) ** 2)
        rad = prm.get("radius", 1.0)

        def bump(x):
            x = np.asarray(x, dtype=float)
            t = (x - c) / rad
            out = np.zeros_like(t)
            inside = np.abs(t) < 1.0
            out[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
            return out

        return bump


@dataclass(frozen=True)
class DiagnosticsSpec:
    regions: tuple = ()          # delta values for the G-region split
    cubes: tuple = ()            # (eps, delta) pairs for the cube check
    translation_shifts: tuple = ()
    exterior: tuple = ()         # cutoff scales n


@dataclass(frozen=True)
class ExperimentConfig:
    kernel_name: str
    kernel_params: dict
    alpha: float
    coefficient_name: str
    coefficient_mode: str
    coefficient_params: dict
    m: float
    R: float
    N: int
    dimension: int
    eps_list: tuple
    rhs: RhsSpec
    hypotheses: tuple = ("H1", "H2", "H3", "H4")
    diagnostics: DiagnosticsSpec = field(default_factory=DiagnosticsSpec)
    output_dir: str | None = None
    solver_rel_tol: float = 1e-10
    lambda_s: int = 64
    mass_tol: float = 1e-6

    def build_kernel(self) -> KernelSpec:
        builder, _ = KERNEL_BUILDERS[self.kernel_name]
        return builder(dimension=self.dimension, alpha=self.alpha,
                       **self.kernel_params)

    def build_coefficient(self):
        factory = BUILTIN_COEFFICIENTS[self.coefficient_name]
        return factory(**self.coefficient_params)

    def build_grid(self):
        from .discretization import Grid

        return Grid(dimension=self.dimension, half_width=self.R, n=self.N)


def _parse_eps_list(raw, h: float) -> tuple:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError("eps_list must be a nonempty list")
    eps = [float(e) for e in raw]
    if any(e <= 0.0 for e in eps):
        raise ConfigError("eps_list entries must be positive")
    for a, b in zip(eps[:-1], eps[1:]):
        if abs(b - a / 2.0) > 1e-12 * a:
            raise ConfigError(
                f"eps_list must be dyadic-decreasing (each entry half the last); got {a} -> {b}"
            )
    if h > min(eps) * (1.0 + 1e-12):
        raise ResolutionError(
            f"grid step h={h} does not resolve the finest eps={min(eps)}; need h <= eps"
        )
    return tuple(eps)


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a parsed JSON document and produce a typed config."""
    _require_keys(doc, _TOP_KEYS, "")
    version = _need(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r}; this build reads version {SCHEMA_VERSION}"
        )
    kern = _need(doc, "kernel")
    _require_keys(kern, {"name", "params"}, "kernel")
    kname = _need(kern, "name", "kernel")
    if kname not in KERNEL_BUILDERS:
        raise ConfigError(
            f"unknown kernel {kname!r}; available: {sorted(KERNEL_BUILDERS)}"
        )
    kparams = dict(kern.get("params", {}))
    allowed = KERNEL_BUILDERS[kname][1]
    for key in kparams:
        if key not in allowed:
            raise ConfigError(f"unknown config key: kernel.params.{key}")

    alpha = float(_need(doc, "alpha"))

    co = _need(doc, "coefficient")
    _require_keys(co, {"name", "mode", "params"}, "coefficient")
    cname = _need(co, "name", "coefficient")
    if cname not in BUILTIN_COEFFICIENTS:
        raise ConfigError(
            f"unknown coefficient {cname!r}; available: {sorted(BUILTIN_COEFFICIENTS)}"
        )
    mode = co.get("mode", "periodic")
    if mode not in ("periodic", "locally_periodic"):
        raise ConfigError(f"coefficient.mode must be periodic or locally_periodic, got {mode!r}")
    cparams = dict(co.get("params", {}))
    for key in cparams:
        if key not in COEFFICIENT_PARAMS[cname]:
            raise ConfigError(f"unknown config key: coefficient.params.{key}")
    built = BUILTIN_COEFFICIENTS[cname](**cparams)
    actual_mode = "locally_periodic" if built.kind == "locally_periodic" else "periodic"
    if mode != actual_mode:
        raise ConfigError(
            f"coefficient.mode {mode!r} does not match {cname!r} (which is {actual_mode})"
        )

    grid = _need(doc, "grid")
    _require_keys(grid, _GRID_KEYS, "grid")
    R = float(_need(grid, "R", "grid"))
    N = int(_need(grid, "N", "grid"))
    dimension = int(grid.get("dimension", 1))

    m = float(_need(doc, "m"))
    if m <= 0.0:
        raise ConfigError(f"m must be positive, got {m}")

    h = 2.0 * R / N
    eps_list = _parse_eps_list(_need(doc, "eps_list"), h)

    rhs_doc = _need(doc, "rhs")
    _require_keys(rhs_doc, {"name", "params"}, "rhs")
    rname = _need(rhs_doc, "name", "rhs")
    if rname not in RHS_PROFILES:
        raise ConfigError(f"unknown rhs profile {rname!r}; available: {sorted(RHS_PROFILES)}")
    rparams = dict(rhs_doc.get("params", {}))
    for key in rparams:
        if key not in RHS_PROFILES[rname]:
            raise ConfigError(f"unknown config key: rhs.params.{key}")
    rhs = RhsSpec(name=rname, params=rparams)

    hyps = doc.get("hypotheses", ["H1", "H2", "H3", "H4"])
    if not isinstance(hyps, (list, tuple)) or not hyps:
        raise ConfigError("hypotheses must be a nonempty list")
    for hname in hyps:
        if hname not in _HYP_NAMES:
            raise ConfigError(f"unknown hypothesis {hname!r}; expected H1..H4")

    diag_doc = doc.get("diagnostics", {})
    _require_keys(diag_doc, _DIAG_KEYS, "diagnostics")
    cubes = []
    for pair in diag_doc.get("cubes", []):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError("diagnostics.cubes entries must be [eps, delta] pairs")
        cubes.append((float(pair[0]), float(pair[1])))
    diagnostics = DiagnosticsSpec(
        regions=tuple(float(d) for d in diag_doc.get("regions", [])),
        cubes=tuple(cubes),
        translation_shifts=tuple(int(s) for s in diag_doc.get("translation_shifts", [])),
        exterior=tuple(float(n) for n in diag_doc.get("exterior", [])),
    )

    tol_doc = doc.get("tolerances", {})
    _require_keys(tol_doc, _TOL_KEYS, "tolerances")

    out_dir = doc.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("output_dir must be a string path")

    return ExperimentConfig(
        kernel_name=kname, kernel_params=kparams, alpha=alpha,
        coefficient_name=cname, coefficient_mode=mode, coefficient_params=cparams,
        m=m, R=R, N=N, dimension=dimension, eps_list=eps_list, rhs=rhs,
        hypotheses=tuple(hyps), diagnostics=diagnostics, output_dir=out_dir,
        solver_rel_tol=float(tol_doc.get("solver_rel_tol", 1e-10)),
        lambda_s=int(tol_doc.get("lambda_s", 64)),
        mass_tol=float(tol_doc.get("mass_tol", 1e-6)),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return parse_config(doc)
