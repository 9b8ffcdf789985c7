"""Structure-preserving solvers for the cubic Schroedinger equation and
its hyperbolic approximation.

The package combines summation-by-parts spatial operators (Fourier
collocation and finite differences) with implicit-explicit Runge-Kutta
time integration and relaxation in time, so that discrete mass and
energy are conserved exactly up to round-off and solver tolerances.
"""

from .config import ConfigError, RunConfig, config_from_mapping, load_config
from .hyperbolic import (
    HypParams,
    HypState,
    ProjectionFailure,
    hyp_energy,
    hyp_mass,
    hyp_rhs,
    hyp_split_ode,
    project_mass_ellipsoid,
    well_prepared_init,
)
from .integrators import RunRecord, SplitOde, integrate, plain_step, rk_step
from .nls import (
    NlsParams,
    NlsState,
    energy,
    mass,
    naive_energy,
    nls_rhs,
    nls_split_ode,
)
from .operators import (
    OperatorConstructionError,
    OperatorSet,
    make_bounded_fd_sbp,
    make_central_fd,
    make_fourier,
    make_grid,
    make_upwind_fd,
    sbp_conformance,
)
from .problems import (
    ProblemSpec,
    available_problems,
    fit_convergence_rate,
    fit_growth_rate,
    get_problem,
    l2_error,
    l2_norm,
    to_hydro,
)
from .relaxation import (
    InvariantPair,
    RelaxationConfig,
    RelaxationFailure,
    project_mass_sphere,
    quadratic_preserving_step,
    standard_relaxation_step,
)
from .runs import (
    GrowthReport,
    RunResult,
    RunSetup,
    execute_run,
    make_setup,
    run_bench,
    run_convergence,
    run_error_growth,
    write_run_outputs,
)
from .tableaux import ImexTableau, TableauError, available_tableaux, get_tableau

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "RunConfig",
    "config_from_mapping",
    "load_config",
    "GrowthReport",
    "RunResult",
    "RunSetup",
    "execute_run",
    "make_setup",
    "run_bench",
    "run_convergence",
    "run_error_growth",
    "write_run_outputs",
    "HypParams",
    "HypState",
    "ProjectionFailure",
    "hyp_energy",
    "hyp_mass",
    "hyp_rhs",
    "hyp_split_ode",
    "project_mass_ellipsoid",
    "well_prepared_init",
    "RunRecord",
    "SplitOde",
    "integrate",
    "plain_step",
    "rk_step",
    "NlsParams",
    "NlsState",
    "energy",
    "mass",
    "naive_energy",
    "nls_rhs",
    "nls_split_ode",
    "OperatorConstructionError",
    "OperatorSet",
    "make_bounded_fd_sbp",
    "make_central_fd",
    "make_fourier",
    "make_grid",
    "make_upwind_fd",
    "sbp_conformance",
    "ProblemSpec",
    "available_problems",
    "fit_convergence_rate",
    "fit_growth_rate",
    "get_problem",
    "l2_error",
    "l2_norm",
    "to_hydro",
    "InvariantPair",
    "RelaxationConfig",
    "RelaxationFailure",
    "project_mass_sphere",
    "quadratic_preserving_step",
    "standard_relaxation_step",
    "ImexTableau",
    "TableauError",
    "available_tableaux",
    "get_tableau",
]
