import numpy as np
import pytest

from vibench import (
    Box,
    DeterministicOperator,
    VIProblem,
    default_gap_fn,
    extragradient_fixed,
    make_matrix_game,
    run,
)


def test_zero_operator_is_stationary():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    problem = VIProblem(DeterministicOperator(lambda x: np.zeros_like(x)), box, label="zero")
    report = extragradient_fixed(problem, 50, step=0.5)
    assert np.array_equal(report.w_hat, box.initial_point())
    assert np.all(np.isnan(report.certificates))
    assert report.L_values[0] == 2.0  # 1/step


def test_requires_positive_step():
    problem = make_matrix_game([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(ValueError):
        extragradient_fixed(problem, 10, step=0.0)


def test_averaged_iterate_converges_on_games(rng):
    for A in (np.array([[0.0, 1.0], [-1.0, 0.0]]), rng.uniform(-1, 1, size=(3, 3))):
        problem = make_matrix_game(A)
        report = extragradient_fixed(problem, 10_000, step=1.0 / problem.known_L,
                                     gap_fn=default_gap_fn(problem))
        assert report.gaps[-1] <= 1e-3


def test_cross_solver_agreement_on_lipschitz_suite(lipschitz_suite):
    # both solvers reach a small gap and nearly the same averaged iterate;
    # grid-based oracles are only evaluated at the final iterate
    for problem in lipschitz_suite:
        gap_fn = default_gap_fn(problem)
        cheap = problem.kind in ("matrix_game", "holder_1d")
        ump = run(problem, 4000, gap_fn=gap_fn if cheap else None)
        eg = extragradient_fixed(problem, 4000, step=1.0 / problem.known_L,
                                 gap_fn=gap_fn if cheap else None)
        gap_ump = ump.gaps[-1] if cheap else gap_fn(ump.w_hat)
        gap_eg = eg.gaps[-1] if cheap else gap_fn(eg.w_hat)
        assert gap_ump <= 1e-2, problem.label
        assert ump.certificates[-1] <= 1e-2, problem.label  # upper bound on the true gap
        assert gap_eg <= 1e-2, problem.label
        assert np.linalg.norm(ump.w_hat - eg.w_hat) <= 5e-2, problem.label
