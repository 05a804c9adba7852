"""Geodesic flows for metrics that change signature on a surface.

The package models a smooth metric ``a dx^2 + 2b dx dy + c dy^2`` whose
discriminant ``ac - b^2`` changes sign along a curve, and provides the
machinery the situation calls for: locating and classifying the degenerate
points, lifting the geodesic equation to the projectivized tangent bundle,
integrating through the lift's singular points, building the geodesic
families that enter them, and drawing the resulting phase portraits.
"""

from .catalog import (
    CATALOG,
    build_catalog_metric,
    catalog_names,
    resolve_metric,
    sphere_embedding,
)
from .checks import SUITES, SuiteReport, run_all, run_suite
from .degeneracy import (
    DegeneracyError,
    DegenerateReport,
    ProjectiveDirection,
    RootDirection,
    classify,
    delta,
    find_S0_point,
    isotropic_direction,
    refine_to_curve,
    tangency_test,
    trace_degenerate_curve,
)
from .expr import DomainError, Expr, ParseError, parse_expr
from .families import (
    FamilyError,
    FamilyMember,
    FamilySpec,
    FitResult,
    NonIsotropicPair,
    dsaddle_epsilons,
    family_case_c_isotropic,
    family_case_d,
    fit_asymptotics,
    geodesic_case_c_nonisotropic,
    null_directions,
    riemannian_entry_probes,
    spectrum_epsilon,
)
from .geoflow import (
    DEFAULT_OPTIONS,
    GeodesicCurve,
    IntegratorOptions,
    NaturalCurve,
    ProjectiveJet,
    clairaut_integral,
    dense_points,
    directed_polyline_gap,
    geodesic_field,
    integrate_geodesic,
    integrate_isotropic,
    integrate_natural,
    raw_divergence,
    singular_jacobian,
    singular_spectrum,
    weighted_divergence_residual,
)
from .metric import (
    Embedding,
    MetricField,
    euclidean_gauss_curvature,
    induced_metric,
    metric_from_dict,
    metric_from_json,
    metric_to_dict,
    parse_metric,
)
from .portrait import (
    DEFAULT_STYLE,
    Portrait,
    PortraitError,
    PortraitStyle,
    StrokeStyle,
    locate_family_point,
    portrait_family,
    portrait_grid,
    write_bundle,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # metric
    "Expr",
    "ParseError",
    "DomainError",
    "parse_expr",
    "MetricField",
    "parse_metric",
    "Embedding",
    "induced_metric",
    "euclidean_gauss_curvature",
    "metric_to_dict",
    "metric_from_dict",
    "metric_from_json",
    # catalog
    "CATALOG",
    "catalog_names",
    "build_catalog_metric",
    "resolve_metric",
    "sphere_embedding",
    # degeneracy
    "DegeneracyError",
    "DegenerateReport",
    "ProjectiveDirection",
    "RootDirection",
    "classify",
    "delta",
    "find_S0_point",
    "refine_to_curve",
    "isotropic_direction",
    "tangency_test",
    "trace_degenerate_curve",
    # geoflow
    "IntegratorOptions",
    "DEFAULT_OPTIONS",
    "ProjectiveJet",
    "GeodesicCurve",
    "NaturalCurve",
    "integrate_geodesic",
    "integrate_isotropic",
    "integrate_natural",
    "geodesic_field",
    "singular_jacobian",
    "singular_spectrum",
    "raw_divergence",
    "weighted_divergence_residual",
    "clairaut_integral",
    "dense_points",
    "directed_polyline_gap",
    # families
    "FamilyError",
    "FitResult",
    "fit_asymptotics",
    "FamilyMember",
    "FamilySpec",
    "NonIsotropicPair",
    "family_case_c_isotropic",
    "geodesic_case_c_nonisotropic",
    "family_case_d",
    "riemannian_entry_probes",
    "null_directions",
    "dsaddle_epsilons",
    "spectrum_epsilon",
    # portraits
    "PortraitError",
    "StrokeStyle",
    "PortraitStyle",
    "DEFAULT_STYLE",
    "Portrait",
    "write_bundle",
    "locate_family_point",
    "portrait_grid",
    "portrait_family",
    # checks
    "SUITES",
    "SuiteReport",
    "run_suite",
    "run_all",
]
