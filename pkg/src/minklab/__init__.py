"""Minkowski norms, their Riemann-Finsler metrics, and Funk spaces."""

from .area import (
    AreaField,
    BrickellReport,
    MinimizerResult,
    area_bounds_check,
    area_gradient,
    area_grid,
    area_hessian,
    area_value,
    brickell_diagnostic,
    ellipsoid_fit,
    grid_to_csv,
    minimize_area,
)
from .averaging import (
    AveragedReport,
    IsometryCheck,
    RandersFunctional,
    averaged_report,
    beta_inequality_margin,
    isometry_invariance_check,
    make_randers,
    remark1_identity_residual,
)
from .errors import *  # noqa: F401,F403
from .funk import (
    FunkContext,
    GeodesicTrace,
    conformal_factor_check,
    curvature_check,
    curvature_closed_form,
    curvature_commutator,
    funk_value,
    funk_x_gradient,
    geodesic,
    horizontal_lifts,
    okada_residual,
    projection_point,
    spray_coefficients,
    theta,
)
from .gauges import (
    BodySpec,
    GaugeJet,
    JetBatch,
    ValidationReport,
    batch_jet,
    cartan_trace,
    evaluate_gauge,
    gauge_jet,
    gauge_values,
    q_curvature,
    sphere_sample,
    validate_spec,
)
from .quadrature import (
    IndicatrixIntegral,
    SphereRule,
    build_rule,
    integrate_indicatrix,
    sphere_area,
    verify_divergence_identity,
    verify_jacobian_lemma,
)

__version__ = "0.1.0"
