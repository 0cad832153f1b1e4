"""Numerics for the overdetermined exterior Schrodinger problem in hyperbolic space.

Radial ground states by shooting (with an independent collocation oracle),
qualitative-lemma checks, the linearized radial spectrum and quadratic forms,
the mode-wise normal-derivative operator with its eigenvalue curves
sigma(lambda), and the bifurcation radii R* = 1/sqrt(lambda*) with tangent
perturbed-domain shapes.
"""

from .errors import (
    CertificateFailureError,
    ConvergenceError,
    DegeneracyError,
    HypExteriorError,
    IncompatibleGridError,
    LemmaViolationError,
    MorseIndexViolationError,
    NoBracketError,
    OracleFailureError,
    SolverError,
    ValidationError,
)
from .model import (
    ModelParams,
    NumericsConfig,
    RadialGrid,
    RadialProfile,
    decay_exponent_linearized,
    decay_exponent_nonlinear,
    metric_factors,
    weighted_l2_inner,
)
from .harmonics import (
    GroupSpectrum,
    SymmetryGroup,
    check_g1,
    g1_threshold,
    group_restricted_spectrum,
    invariant_projection_rank,
    sphere_eigenvalue,
)
from .radial import (
    GroundStateCache,
    ShootingResult,
    convergence_study,
    fd_bvp_oracle,
    ground_state_scaled,
    lambda_derivative,
    rescale_to_unit,
    solve_exterior_ground_state,
    solve_whole_space_ground_state,
)
from .qualitative import (
    SignPattern,
    analyze_G_sign,
    energy_profile,
    estimate_decay_rate,
    profile_shape_check,
)
from .spectral import (
    EigenPair,
    ModeFunction,
    lambda0_lower_bound,
    quadratic_form_Q,
    quadratic_form_Qtilde,
    radial_spectrum,
    trace_inequality_check,
    weighted_boundary_inequality_check,
)
from .dtn import (
    BoundaryFunction,
    SigmaCurve,
    apply_H,
    dirichlet_extension,
    sigma_curve,
    sigma_eigenvalue,
    solve_mode_ode,
    variational_sigma,
)
from .bifurcation import (
    BifurcationPoint,
    BoundaryShape,
    bifurcation_radius,
    certify_local_bifurcation,
    emit_perturbed_domain,
    find_lambda_star,
    run_bifurcation_pipeline,
)

__version__ = "0.1.0"
