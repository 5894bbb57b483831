"""Kernel interpolation on embedded submanifolds of R^3.

Restricted positive-definite kernels (compactly supported Wendland and
Matern families) interpolate scattered data on closed curves and
surfaces; Riesz-energy minimization supplies quasi-uniform node sets;
convergence studies measure how the interpolation error decays with the
fill distance and compare the fitted slopes against the rates predicted
by Sobolev error theory.
"""

__version__ = "0.1.0"

from ._accel import backend_name
from .errors import (
    ConditioningError,
    ConfigurationError,
    DomainError,
    ManikernError,
    NormalizationError,
    ParseError,
    SingularConfigurationError,
)
from .interp import Interpolant, evaluate, fit, native_norm_sq
from .kernels import (
    Kernel,
    bessel_k,
    kernel_matrix,
    matern,
    matern_kernel,
    parse_kernel,
    wendland32,
    wendland_kernel,
)
from .manifold import (
    MANIFOLD_NAMES,
    EvaluationGrid,
    ParametricManifold,
    get_manifold,
)
from .nodeset import (
    MeshMeasures,
    NodeSet,
    explicit_nodeset,
    mesh_measures,
    minimize_riesz,
    riesz_energy,
)
from .study import (
    ConvergenceReport,
    LevelRow,
    StudyConfig,
    discrete_l2,
    fit_slope,
    plot_script,
    predicted_rates,
    prediction_summary,
    relative_errors,
    report_to_csv,
    report_to_json,
    rows_from_csv,
    run_convergence,
)
from .targets import (
    TargetFunction,
    build_target,
    matern_order,
    poly_target,
    smooth_target,
    target_from_spec,
)

__all__ = [
    "__version__",
    "backend_name",
    "ManikernError",
    "DomainError",
    "SingularConfigurationError",
    "ConditioningError",
    "ConfigurationError",
    "NormalizationError",
    "ParseError",
    "Kernel",
    "wendland32",
    "bessel_k",
    "matern",
    "wendland_kernel",
    "matern_kernel",
    "parse_kernel",
    "kernel_matrix",
    "EvaluationGrid",
    "ParametricManifold",
    "MANIFOLD_NAMES",
    "get_manifold",
    "MeshMeasures",
    "NodeSet",
    "riesz_energy",
    "minimize_riesz",
    "explicit_nodeset",
    "mesh_measures",
    "Interpolant",
    "fit",
    "evaluate",
    "native_norm_sq",
    "TargetFunction",
    "poly_target",
    "smooth_target",
    "matern_order",
    "build_target",
    "target_from_spec",
    "StudyConfig",
    "LevelRow",
    "ConvergenceReport",
    "discrete_l2",
    "relative_errors",
    "predicted_rates",
    "prediction_summary",
    "fit_slope",
    "run_convergence",
    "report_to_csv",
    "report_to_json",
    "rows_from_csv",
    "plot_script",
]
