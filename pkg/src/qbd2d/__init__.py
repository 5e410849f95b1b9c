"""Tail decay rates of two-dimensional quasi-birth-and-death processes.

The package models a discrete-time reflecting random walk on the quadrant
with a finite phase, computes the geometry of the convergence domain of
its interior generating matrix, the per-axis critical tilts from the
censored first-passage matrices, and from these the asymptotic decay rate
of the stationary distribution along any lattice direction.  A truncated
brute-force solver provides independent empirical verification.
"""

from .directional import (
    BindingConstraint,
    DirectionalDecayReport,
    Regime,
    TypeClass,
    classify_type,
    theta_dagger_directional,
    xi_c,
    xi_c_geometric,
)
from .geometry import (
    DirectionVector,
    EtaCurves,
    GammaGeometry,
    OutsideDomainError,
    UnboundedDomainError,
    compute_geometry,
    directional_extremes,
    directional_tangency,
    eta_curves,
    eta_line_roots,
    theta_extremes,
)
from .matrix_analytic import (
    CoordinateDecayProfile,
    GNonConvergenceError,
    StabilityError,
    StabilityVerdict,
    classify_stability,
    compute_U,
    coordinate_profile,
    mean_drifts,
    solve_G,
    solve_R,
    stability,
    theta_dagger_coordinate,
    theta_star,
)
from .model import (
    BlockVector,
    ModelFormatError,
    QbdModel,
    Region,
    Violation,
    build_block_process,
    eval_generating_matrix,
    gen_col,
    gen_row,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate,
)
from .oracle import (
    OracleConvergenceError,
    OracleFitError,
    SlopeFit,
    TruncatedStationary,
    default_window,
    fit_decay,
    solve_truncated,
)
from .perron import PerronConvergenceError, perron_root, spectral_radius, stationary_vector
from .polling import LimitedServiceParams, build_limited_service

__all__ = [
    "BindingConstraint",
    "BlockVector",
    "CoordinateDecayProfile",
    "DirectionVector",
    "DirectionalDecayReport",
    "EtaCurves",
    "GNonConvergenceError",
    "GammaGeometry",
    "LimitedServiceParams",
    "ModelFormatError",
    "OracleConvergenceError",
    "OracleFitError",
    "OutsideDomainError",
    "PerronConvergenceError",
    "QbdModel",
    "Regime",
    "Region",
    "SlopeFit",
    "StabilityError",
    "StabilityVerdict",
    "TruncatedStationary",
    "TypeClass",
    "UnboundedDomainError",
    "Violation",
    "build_block_process",
    "build_limited_service",
    "classify_stability",
    "classify_type",
    "compute_U",
    "compute_geometry",
    "coordinate_profile",
    "default_window",
    "directional_extremes",
    "directional_tangency",
    "eta_curves",
    "eta_line_roots",
    "eval_generating_matrix",
    "fit_decay",
    "gen_col",
    "gen_row",
    "load_model",
    "mean_drifts",
    "model_from_dict",
    "model_to_dict",
    "perron_root",
    "save_model",
    "solve_G",
    "solve_R",
    "solve_truncated",
    "spectral_radius",
    "stability",
    "stationary_vector",
    "theta_dagger_coordinate",
    "theta_dagger_directional",
    "theta_extremes",
    "theta_star",
    "validate",
    "xi_c",
    "xi_c_geometric",
]

__version__ = "0.1.0"
