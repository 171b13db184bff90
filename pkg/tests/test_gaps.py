import itertools

import numpy as np
import pytest

from vibench import (
    Ball,
    Box,
    DeterministicOperator,
    Product,
    Simplex,
    UnsupportedInstanceError,
    VIProblem,
    default_gap_fn,
    gap_bruteforce,
    gap_matrix_game,
    gap_power_1d,
    make_holder_1d,
    make_matrix_game,
    run,
    stampacchia_residual,
    suboptimality,
)

CANONICAL_A = np.array([[0.0, 1.0], [-1.0, 0.0]])


def vertex_enum_gap(A, u_hat, v_hat):
    """Independent enumeration of <g(y), w_hat - y> over all vertex pairs."""
    m, n = A.shape
    best, best_y = -np.inf, None
    for i, j in itertools.product(range(m), range(n)):
        e_u, e_v = np.zeros(m), np.zeros(n)
        e_u[i], e_v[j] = 1.0, 1.0
        g_u, g_v = A @ e_v, -(A.T @ e_u)
        val = float(g_u @ (u_hat - e_u) + g_v @ (v_hat - e_v))
        if val > best:
            best, best_y = val, np.concatenate([e_u, e_v])
    return best, best_y


def test_game_gap_at_uniform_point():
    # brute-force over all vertex pairs gives exactly 1 at the uniform point
    u = np.array([0.5, 0.5])
    res = gap_matrix_game(CANONICAL_A, u, u)
    assert res.value == pytest.approx(1.0, abs=1e-15)
    brute, _ = vertex_enum_gap(CANONICAL_A, u, u)
    assert res.value == pytest.approx(brute, abs=1e-15)
    assert res.method == "closed_form"


def test_game_gap_zero_at_equilibrium():
    # diagonal game diag(1, 2): equalizing strategies (2/3, 1/3) on both sides
    A = np.diag([1.0, 2.0])
    eq = np.array([2 / 3, 1 / 3])
    assert gap_matrix_game(A, eq, eq).value == pytest.approx(0.0, abs=1e-15)
    # the canonical skew game solves at ((0,1), (0,1))
    e = np.array([0.0, 1.0])
    assert gap_matrix_game(CANONICAL_A, e, e).value == 0.0


def test_game_gap_matches_vertex_enumeration(rng):
    for _ in range(50):
        A = rng.uniform(-2, 2, size=(3, 3))
        u = rng.dirichlet(np.ones(3))
        v = rng.dirichlet(np.ones(3))
        res = gap_matrix_game(A, u, v)
        brute, _ = vertex_enum_gap(A, u, v)
        assert abs(res.value - brute) <= 1e-12


def test_game_gap_witness_attains_value(rng):
    for _ in range(20):
        A = rng.uniform(-1, 1, size=(2, 3))
        u = rng.dirichlet(np.ones(2))
        v = rng.dirichlet(np.ones(3))
        res = gap_matrix_game(A, u, v)
        w_hat = np.concatenate([u, v])
        y = res.witness
        g_y = np.concatenate([A @ y[2:], -(A.T @ y[:2])])
        assert res.value >= float(g_y @ (w_hat - y)) - 1e-12


def test_game_gap_rejects_infeasible():
    with pytest.raises(ValueError):
        gap_matrix_game(CANONICAL_A, np.array([0.7, 0.7]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        gap_matrix_game(CANONICAL_A, np.array([0.5, 0.5]), np.array([-0.2, 1.2]))


def test_bruteforce_zero_operator():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    op = DeterministicOperator(lambda x: np.zeros_like(x))
    res = gap_bruteforce(op, box, np.array([0.3, -0.2]), resolution=51)
    assert res.value == 0.0


def test_bruteforce_sign_problem():
    # sup over y of sign(y)(0.5 - y) is 0.5, approached as y -> 0+; the grid
    # maximum sits one spacing away
    problem = make_holder_1d(0.0)
    res = gap_bruteforce(problem.operator, problem.set, np.array([0.5]), resolution=10_001)
    assert res.method == "grid"
    h = res.grid_spacing
    assert 0.5 - 2 * h <= res.value <= 0.5
    assert res.value == pytest.approx(0.5 - h, abs=1e-12)


def test_bruteforce_agrees_with_game_closed_form(rng):
    # dimension 4 routes through vertex enumeration, exact for bilinear fields
    problem = make_matrix_game(CANONICAL_A)
    u = rng.dirichlet(np.ones(2))
    v = rng.dirichlet(np.ones(2))
    w_hat = np.concatenate([u, v])
    res = gap_bruteforce(problem.operator, problem.set, w_hat)
    assert res.method == "vertex_enum"
    assert res.value == pytest.approx(gap_matrix_game(CANONICAL_A, u, v).value, abs=1e-12)


def test_bruteforce_nonnegative_for_feasible_points(rng):
    problem = make_holder_1d(0.5)
    for _ in range(20):
        w = problem.set.sample(rng)
        assert gap_bruteforce(problem.operator, problem.set, w, resolution=501).value >= -1e-9


def test_bruteforce_refuses_large_instances():
    op = DeterministicOperator(lambda x: x)
    with pytest.raises(UnsupportedInstanceError):
        gap_bruteforce(op, Box(-np.ones(4), np.ones(4)), np.zeros(4))
    with pytest.raises(UnsupportedInstanceError):
        gap_bruteforce(op, Product((Simplex(6), Simplex(6))), np.full(12, 1 / 6))


def test_power_family_closed_form_matches_grid():
    ys = np.linspace(-1.0, 1.0, 200_001)
    for nu in (0.0, 0.25, 0.5, 1.0):
        g = np.sign(ys) * np.abs(ys) ** nu
        for w in (-0.8, -0.2, 0.0, 0.3, 0.9):
            grid = float((g * (w - ys)).max())
            assert gap_power_1d(nu, w) == pytest.approx(grid, abs=1e-4)


def test_default_gap_fn_dispatch(rng):
    game = make_matrix_game(CANONICAL_A)
    f = default_gap_fn(game)
    u = np.array([0.5, 0.5, 0.5, 0.5])
    assert f(u) == pytest.approx(1.0)
    power = make_holder_1d(0.5)
    f2 = default_gap_fn(power)
    assert f2(np.array([0.3])) == pytest.approx(gap_power_1d(0.5, 0.3))
    ball_problem = VIProblem(DeterministicOperator(lambda x: x), Ball([0.0, 0.0], 1.0))
    f3 = default_gap_fn(ball_problem)
    assert f3(np.zeros(2)) >= -1e-12
    big = VIProblem(DeterministicOperator(lambda x: x), Ball(np.zeros(5), 1.0))
    assert default_gap_fn(big) is None


def test_stampacchia_residual_values():
    problem = make_holder_1d(1.0)  # g(x) = x on [-1, 1]
    assert stampacchia_residual(problem.operator, problem.set, np.array([0.0])) == 0.0
    # at x_hat = 0.1 the linear maximization lands on x = -1: 0.1 * 1.1
    res = stampacchia_residual(problem.operator, problem.set, np.array([0.1]))
    assert res == pytest.approx(0.11, abs=1e-12)


def test_stampacchia_residual_shrinks_along_run():
    problem = make_holder_1d(1.0)
    op, box = problem.operator, problem.set
    residuals = []
    for K in (50, 500, 5000):
        report = run(problem, K, z0=[0.9])
        residuals.append(stampacchia_residual(op, box, report.w_hat))
    assert residuals[2] <= residuals[1] <= residuals[0]
    assert residuals[2] <= 1e-3


def test_suboptimality_values_and_sandwich():
    assert suboptimality(0.0, 0.0) == 0.0
    # f(x) = x^2/2 at w_hat = 0.2
    assert suboptimality(0.02, 0.0) == pytest.approx(0.02)
    # roaming gap <= f(w_hat) - f* <= strong residual, across the power family
    for nu in (0.0, 0.5, 1.0):
        problem = make_holder_1d(nu)
        for w in (0.1, 0.4, 0.9):
            sub = suboptimality(abs(w) ** (1 + nu) / (1 + nu), 0.0)
            roaming = gap_power_1d(nu, w)
            strong = stampacchia_residual(problem.operator, problem.set, np.array([w]))
            assert roaming <= sub + 1e-12
            assert sub <= strong + 1e-9


def test_weak_and_strong_solutions_coincide_on_grid():
    # the grid point minimizing the restricted gap also has (near-)zero
    # strong residual for a continuous monotone operator
    problem = make_holder_1d(1.0)
    op, box = problem.operator, problem.set
    candidates = np.linspace(-1, 1, 201)
    gaps = [gap_bruteforce(op, box, np.array([c]), resolution=201).value for c in candidates]
    best = candidates[int(np.argmin(gaps))]
    spacing = candidates[1] - candidates[0]
    assert abs(best) <= spacing + 1e-12
    assert stampacchia_residual(op, box, np.array([best]), resolution=201) <= 2 * spacing
