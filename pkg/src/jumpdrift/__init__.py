"""Strong approximation of scalar jump-diffusion SDEs with discontinuous drift.

The package builds a coefficient-regularizing transform for piecewise
Lipschitz drifts, integrates the transformed equation with jump-adapted
Euler and quasi-Milstein schemes (plus a non-adaptive Euler-Maruyama
baseline), and ships a Monte Carlo harness for measuring strong
convergence orders and probing the information-theoretic error floor.
"""

from .drift import (
    DriftPiece,
    JumpDiffusionProblem,
    PiecewiseDrift,
    linear_drift,
    neg_sign_drift,
    piecewise_linear_drift,
)
from .errors import (
    ConfigError,
    ConstructionError,
    CouplingError,
    DomainError,
    JumpDriftError,
    NumericsError,
)
from .noise import (
    DrivingNoise,
    JumpAdaptedGrid,
    aggregate_increments,
    brownian_at,
    brownian_at_jump_times,
    build_jump_adapted_grid,
    equidistant_grid,
    jump_counts_per_cell,
    sample_brownian_on_master,
    sample_driving_noise,
    sample_jump_count,
    sample_jump_times,
)
from .schemes import (
    SchemeTrajectory,
    back_transform,
    discrete_sup_distance,
    euler_maruyama,
    jump_adapted_euler,
    jump_adapted_quasi_milstein,
    terminal_value,
)
from .study import (
    ConvergenceReport,
    ProbeReport,
    RateFit,
    SCHEME_NAMES,
    convergence_study,
    estimate_strong_error,
    fit_rate,
    probe_lower_bound,
    simulate_terminal_values,
)
from .transform import (
    Transform,
    TransformedCoefficients,
    admissible_halfwidth_bound,
    build_transform,
    bump_profile,
    bump_profile_d1,
    bump_profile_d2,
    transformed_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConstructionError",
    "ConvergenceReport",
    "CouplingError",
    "DomainError",
    "DriftPiece",
    "DrivingNoise",
    "JumpAdaptedGrid",
    "JumpDiffusionProblem",
    "JumpDriftError",
    "NumericsError",
    "PiecewiseDrift",
    "ProbeReport",
    "RateFit",
    "SCHEME_NAMES",
    "SchemeTrajectory",
    "Transform",
    "TransformedCoefficients",
    "admissible_halfwidth_bound",
    "aggregate_increments",
    "back_transform",
    "brownian_at",
    "brownian_at_jump_times",
    "build_jump_adapted_grid",
    "build_transform",
    "bump_profile",
    "bump_profile_d1",
    "bump_profile_d2",
    "convergence_study",
    "discrete_sup_distance",
    "equidistant_grid",
    "estimate_strong_error",
    "euler_maruyama",
    "fit_rate",
    "jump_adapted_euler",
    "jump_adapted_quasi_milstein",
    "jump_counts_per_cell",
    "linear_drift",
    "neg_sign_drift",
    "piecewise_linear_drift",
    "probe_lower_bound",
    "sample_brownian_on_master",
    "sample_driving_noise",
    "sample_jump_count",
    "sample_jump_times",
    "simulate_terminal_values",
    "terminal_value",
    "transformed_coefficients",
    "__version__",
]
