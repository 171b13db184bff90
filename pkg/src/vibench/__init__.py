"""Adaptive mirror-prox solvers for monotone variational inequalities.

Deterministic and stochastic solvers that adapt their quadratic
coefficient online (no Hölder exponent, constant, or noise level as
inputs), per-iterate gap certificates, exact and brute-force gap oracles,
a test-problem zoo, and a benchmark CLI (``vibench``).
"""

from .baseline import extragradient_fixed
from .gaps import (
    GapResult,
    UnsupportedInstanceError,
    default_gap_fn,
    gap_bruteforce,
    gap_matrix_game,
    gap_power_1d,
    stampacchia_residual,
    suboptimality,
)
from .operators import (
    DeterministicOperator,
    EvaluationError,
    StochasticOracle,
    holder_ratio,
    monotonicity_deficit,
    prox_step,
)
from .problems import (
    VIProblem,
    add_gaussian_noise,
    make_affine_monotone,
    make_fixed_point,
    make_holder_1d,
    make_matrix_game,
    problem_from_dict,
    problem_to_dict,
    suite_problems,
)
from .sets import Ball, Box, FeasibleSet, Product, Simplex, diameter, initial_point, project, set_from_dict
from .solver import (
    RunReport,
    SolverError,
    SolverState,
    certificate_bound,
    checkpoint_schedule,
    gap_rate_bound,
    initial_state,
    iterations_for_accuracy,
    l_growth_bound,
    l_update,
    resolve_diameter,
    run,
    ump_iterate,
)
from .stochastic import (
    StochasticRunReport,
    expected_gap_bound,
    expected_l_growth_bound,
    mean_gap_estimate,
    run_stochastic,
    sump_iterate,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "Box",
    "DeterministicOperator",
    "EvaluationError",
    "FeasibleSet",
    "GapResult",
    "Product",
    "RunReport",
    "Simplex",
    "SolverError",
    "SolverState",
    "StochasticOracle",
    "StochasticRunReport",
    "UnsupportedInstanceError",
    "VIProblem",
    "add_gaussian_noise",
    "certificate_bound",
    "checkpoint_schedule",
    "default_gap_fn",
    "diameter",
    "expected_gap_bound",
    "expected_l_growth_bound",
    "extragradient_fixed",
    "gap_bruteforce",
    "gap_matrix_game",
    "gap_power_1d",
    "gap_rate_bound",
    "holder_ratio",
    "initial_point",
    "initial_state",
    "iterations_for_accuracy",
    "l_growth_bound",
    "l_update",
    "make_affine_monotone",
    "make_fixed_point",
    "make_holder_1d",
    "make_matrix_game",
    "mean_gap_estimate",
    "monotonicity_deficit",
    "problem_from_dict",
    "problem_to_dict",
    "project",
    "prox_step",
    "resolve_diameter",
    "run",
    "run_stochastic",
    "set_from_dict",
    "stampacchia_residual",
    "suboptimality",
    "suite_problems",
    "sump_iterate",
    "ump_iterate",
]
