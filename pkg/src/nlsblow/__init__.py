"""Numerical laboratory for finite-time blow-up in the nonlinear Schrodinger
equation with a complex-coefficient power nonlinearity,
``i u_t + Lap(u) = lam |u|^alpha u`` with ``Im(lam) > 0``.

Pieces:

* :mod:`nlsblow.params`  -- admissibility inequalities and exponent calculus.
* :mod:`nlsblow.profile` -- the exact ODE blow-up profile and its scaling laws.
* :mod:`nlsblow.field`   -- grids, discrete norms, derivative operators.
* :mod:`nlsblow.solver`  -- split-step evolution with a-priori-law diagnostics.
* :mod:`nlsblow.study`   -- backward Cauchy runs from profile data, rate fits,
  and Cauchy-gap compactness diagnostics.
* :mod:`nlsblow.cli`     -- command-line front end and artifact emission.
"""

__version__ = "0.1.0"

from .params import (
    AdmissibilityReport,
    ExponentTable,
    PhysParams,
    condition_A2,
    critical_power,
    exponent_table,
    min_admissible_k,
    power_case,
    validate_assumptions,
)
from .field import (
    Field,
    Grid,
    NormReport,
    field_from_csv,
    field_to_csv,
    gradient,
    laplacian,
    lp_norm,
    norm_report,
    power_diff_bound_check,
    weighted_l2_norm,
)
from .profile import (
    ScalingFit,
    make_profile_grid,
    profile_field,
    profile_gradient,
    profile_laplacian,
    profile_norm,
    profile_ode_residual,
    profile_radial_derivative,
    profile_time_derivative,
    profile_value,
    verify_scaling,
)
from .solver import (
    CriticalBoundReport,
    SolveConfig,
    SolverBlowupError,
    TrajectoryRecord,
    charge_identity_residual,
    critical_spacetime_bound,
    evolve,
    gradient_monotonicity_check,
    linear_substep,
    nonlinear_substep,
    trajectory_to_csv,
)
from .study import (
    CauchyDiagnostic,
    EpsilonTrajectory,
    RateFit,
    StudyConfig,
    StudyReport,
    blowup_report,
    cauchy_diagnostic,
    fit_rates,
    run_all_trajectories,
    run_epsilon_trajectory,
    strang_convergence_ratio,
    uniform_delta_probe,
)

__all__ = [name for name in dir() if not name.startswith("_")]
