"""Mean-field three-state spin model with linear and nematic external fields.

Exact finite-N thermodynamics by occupation-class enumeration, the limiting
free energy and its equations of state, closed-form cusp/fold singularity
structure, a Metropolis cross-check, and CSV/JSON emitters behind a CLI.
"""

from .errors import (
    DegenerateBranchSetError,
    InfiniteFieldError,
    OutOfDomainError,
    PottsError,
    SingularDomainError,
    SizeError,
    SolverFailureError,
)
from .exact import (
    FiniteNResult,
    convergence_table,
    diffusion_residual,
    exact_log_partition,
    exact_moments,
    finite_n_result,
    initial_partition_closed,
)
from .mc import McConfig, McEstimate, mc_run, mc_vs_exact
from .model import (
    ModelSpec,
    ThermoPoint,
    VandermondeMap,
    eos_jacobian_q3,
    eos_residual_general,
    eos_residual_q3,
    fields_from_state,
    free_energy,
    free_energy_general,
    free_energy_q3,
    kronecker_poly,
    moments_from_probabilities,
    probabilities_from_moments,
    probabilities_q3,
)
from .singularity import (
    CuspEvent,
    CuspPoint,
    cusp_event_timeline,
    cusp_locus_lines,
    cusp_locus_loop,
    cusp_point,
    cusp_residuals,
    cusp_residuals_scaled,
    fold_residual,
    line_image,
    loop_image,
    map_cusp_to_fields,
    quartic_residual,
    sample_locus,
)
from .solver import (
    CatastropheReport,
    EquilibriumBranch,
    SolverConfig,
    SweepResult,
    damped_newton,
    detect_catastrophe,
    select_equilibrium,
    solve_branches,
    sweep_profile,
    zero_field_transition,
)
from .verify import run_battery

__version__ = "0.1.0"
