"""Numerical laboratory for homogenization of nonlocal convolution operators.

Rescaled operators L^eps u(x) = eps^{-d-alpha} int p((x-y)/eps)
Lambda(x/eps, y/eps) (u(y) - u(x)) dy with an oscillating periodic
coefficient, their homogenized stable-like limit, resolvent solves on a
truncated box with exterior killing, and diagnostics for the estimates the
limit rests on.
"""
from .coefficients import (
    BUILTIN_COEFFICIENTS,
    EffectiveField,
    LocallyPeriodicCoefficient,
    PeriodicCoefficient,
    effective_lambda,
    effective_lambda_field,
    make_constant,
    make_cosine_difference,
    make_product_sine,
    make_slow_modulated,
)
from .config import (
    SCHEMA_VERSION,
    DiagnosticsSpec,
    ExperimentConfig,
    RhsSpec,
    load_config,
    parse_config,
)
from .diagnostics import (
    ConvergenceReport,
    CubeCheckReport,
    ExteriorReport,
    RegionSplit,
    StudyConfig,
    TranslationReport,
    cube_decomposition_check,
    exterior_cutoff,
    exterior_decay_check,
    region_split_energy,
    run_convergence_study,
    translation_energy_check,
)
from .discretization import (
    AngularDensity,
    AssemblyConfig,
    ConvolutionApplier,
    Grid,
    GridFunction,
    NonlocalOperator,
    apply_operator,
    assemble_effective,
    assemble_eps,
    energy,
    export_operator,
)
from .errors import (
    ConfigError,
    GridMismatchError,
    InvalidParameterError,
    NlhomogError,
    QuadratureConvergenceError,
    QuadratureStallError,
    ResolutionError,
    ScaleSeparationError,
    SupportError,
)
from .kernels import (
    HypothesisReport,
    KernelSpec,
    check_annular_bound,
    check_h1,
    check_h3,
    check_h4,
    check_lower_bound,
    estimate_k,
    make_core_tail_kernel,
    make_pareto_kernel,
    make_truncated_kernel,
    mass,
    oscillation_phi,
    shell_mass,
    tail_mass,
    verify_hypotheses,
)
from .solver import SolveConfig, SolveReport, energy_functional, resolvent_solve

__version__ = "0.1.0"

__all__ = [
    "AngularDensity",
    "AssemblyConfig",
    "BUILTIN_COEFFICIENTS",
    "ConfigError",
    "ConvergenceReport",
    "ConvolutionApplier",
    "CubeCheckReport",
    "DiagnosticsSpec",
    "EffectiveField",
    "ExperimentConfig",
    "ExteriorReport",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "HypothesisReport",
    "InvalidParameterError",
    "KernelSpec",
    "LocallyPeriodicCoefficient",
    "NlhomogError",
    "NonlocalOperator",
    "PeriodicCoefficient",
    "QuadratureConvergenceError",
    "QuadratureStallError",
    "RegionSplit",
    "ResolutionError",
    "RhsSpec",
    "SCHEMA_VERSION",
    "ScaleSeparationError",
    "SolveConfig",
    "SolveReport",
    "StudyConfig",
    "SupportError",
    "TranslationReport",
    "apply_operator",
    "assemble_effective",
    "assemble_eps",
    "check_annular_bound",
    "check_h1",
    "check_h3",
    "check_h4",
    "check_lower_bound",
    "cube_decomposition_check",
    "effective_lambda",
    "effective_lambda_field",
    "energy",
    "energy_functional",
    "estimate_k",
    "exterior_cutoff",
    "exterior_decay_check",
    "export_operator",
    "load_config",
    "make_constant",
    "make_core_tail_kernel",
    "make_cosine_difference",
    "make_pareto_kernel",
    "make_product_sine",
    "make_slow_modulated",
    "make_truncated_kernel",
    "mass",
    "oscillation_phi",
    "parse_config",
    "region_split_energy",
    "resolvent_solve",
    "run_convergence_study",
    "shell_mass",
    "tail_mass",
    "translation_energy_check",
    "verify_hypotheses",
]
