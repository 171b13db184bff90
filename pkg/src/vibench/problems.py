"""Test-problem zoo with known smoothness constants and solutions.

Each constructor returns a :class:`VIProblem` bundling a monotone
operator, a feasible set, and whatever is known analytically about the
instance (Hölder exponent and constant, a solution).  Problems built by
the zoo carry a machine-readable ``kind``/``params`` pair so they can be
round-tripped through the JSON configs of the benchmark CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import DeterministicOperator, StochasticOracle
from .sets import Ball, Box, FeasibleSet, Product, Simplex, set_from_dict


@dataclass(frozen=True, eq=False)
class VIProblem:
    """A monotone operator on a feasible set, plus known constants."""

    operator: DeterministicOperator
    set: FeasibleSet
    label: str = ""
    known_nu: float | None = None
    known_L: float | None = None
    known_solution: np.ndarray | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def diameter(self) -> float:
        return self.set.diameter()


def make_matrix_game(A, label: str | None = None) -> VIProblem:
    """Bilinear min-max game on a product of probability simplices.

    For payoff f(u, v) = u^T A v, the monotone field is
    g(u, v) = (A v, -A^T u): the v block enters with a minus sign so that
    <g(x) - g(y), x - y> vanishes identically (skew field).  The field is
    Lipschitz with constant equal to the largest singular value of A, and
    the product of two simplices has diameter 2.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if not np.all(np.isfinite(A)):
        raise ValueError("payoff matrix must be finite")
    m, n = A.shape

    def field_fn(z):
        u, v = z[:m], z[m:]
        return np.concatenate([A @ v, -(A.T @ u)])

    return VIProblem(
        operator=DeterministicOperator(field_fn, holder_exponent=1.0,
                                       holder_constant=float(np.linalg.norm(A, 2))),
        set=Product((Simplex(m), Simplex(n))),
        label=label or f"matrix-game-{m}x{n}",
        known_nu=1.0,
        known_L=float(np.linalg.norm(A, 2)),
        kind="matrix_game",
        params={"A": A.tolist()},
    )


def make_holder_1d(nu: float, label: str | None = None) -> VIProblem:
    """1-D power family g(x) = sign(x)|x|^nu on [-1, 1].

    This is the subgradient field of f(x) = |x|^(1+nu)/(1+nu); it is
    monotone, Hölder with exponent nu and (tight) constant 2^(1-nu), and
    x* = 0 is the exact solution.  At nu = 0 the operator is the sign
    function with g(0) = 0, the subgradient selection that keeps 0 an
    exact strong solution.
    """
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")

    def field_fn(x):
        return np.sign(x) * np.abs(x) ** nu

    return VIProblem(
        operator=DeterministicOperator(field_fn, holder_exponent=nu,
                                       holder_constant=2.0 ** (1.0 - nu)),
        set=Box(np.array([-1.0]), np.array([1.0])),
        label=label or f"power-1d-nu{nu:g}",
        known_nu=nu,
        known_L=2.0 ** (1.0 - nu),
        known_solution=np.array([0.0]),
        kind="holder_1d",
        params={"nu": nu},
    )


def make_affine_monotone(M, b, feasible: FeasibleSet, label: str | None = None) -> VIProblem:
    """Affine field g(x) = M x + b; monotone iff M + M^T is PSD."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64)
    n = feasible.dimension
    if M.shape != (n, n) or b.shape != (n,):
        raise ValueError(f"M must be {n}x{n} and b length {n} for this set")
    sym_eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    scale = max(1.0, float(np.abs(M).max()))
    if sym_eigs.min() < -1e-10 * scale:
        raise ValueError(f"M + M^T has a negative eigenvalue ({sym_eigs.min():.3e}); "
                         "the field would not be monotone")

    def field_fn(x):
        return M @ x + b

    return VIProblem(
        operator=DeterministicOperator(field_fn, holder_exponent=1.0,
                                       holder_constant=float(np.linalg.norm(M, 2))),
        set=feasible,
        label=label or f"affine-{n}d",
        known_nu=1.0,
        known_L=float(np.linalg.norm(M, 2)),
        kind="affine",
        params={"M": M.tolist(), "b": b.tolist(), "set": feasible.to_dict()},
    )


def make_fixed_point(F, feasible: FeasibleSet, label: str | None = None,
                     n_check: int = 256, seed: int = 0,
                     known_solution=None) -> VIProblem:
    """Residual field g(x) = x - F(x) of a nonexpansive map F.

    Solutions of the variational inequality are the fixed points of F.
    Nonexpansiveness is checked on sampled member pairs; an observed
    expansion is rejected.  Any nonexpansive F gives a 2-Lipschitz field,
    so (nu, L) = (1, 2) is declared.  Not JSON-serializable (F is an
    arbitrary callable).
    """
    rng = np.random.default_rng(seed)
    for _ in range(n_check):
        x = feasible.sample(rng)
        y = feasible.sample(rng)
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            continue
        if float(np.linalg.norm(np.asarray(F(x)) - np.asarray(F(y)))) > dist * (1.0 + 1e-9):
            raise ValueError("map expands sampled pairs; fixed-point field would not be monotone")

    def field_fn(x):
        return x - np.asarray(F(x), dtype=np.float64)

    return VIProblem(
        operator=DeterministicOperator(field_fn, holder_exponent=1.0, holder_constant=2.0),
        set=feasible,
        label=label or "fixed-point",
        known_nu=1.0,
        known_L=2.0,
        known_solution=None if known_solution is None else np.asarray(known_solution, dtype=np.float64),
        kind="fixed_point",
    )


def add_gaussian_noise(problem: VIProblem, sigma: float) -> StochasticOracle:
    """Unbiased isotropic-Gaussian corruption of the problem's operator.

    Samples g(x) + (sigma/sqrt(n)) * zeta with zeta standard normal, so
    E||sample - g(x)||^2 = sigma^2 exactly: the variance bound is tight at
    sigma^2, which makes the noise term of the expectation bounds directly
    checkable.
    """
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    n = problem.set.dimension
    scale = sigma / np.sqrt(n)
    op = problem.operator

    def sample_fn(x, rng):
        return op(x) + scale * rng.standard_normal(n)

    return StochasticOracle(sample_fn=sample_fn, mean_operator=op, sigma=sigma)


def problem_to_dict(problem: VIProblem, noise_sigma: float | None = None) -> dict:
    """JSON description of a zoo problem (label, kind, parameters, constants)."""
    if problem.kind not in ("matrix_game", "holder_1d", "affine"):
        raise ValueError(f"problem kind {problem.kind!r} is not serializable")
    d = {
        "kind": problem.kind,
        "label": problem.label,
        "params": problem.params,
        "known_nu": problem.known_nu,
        "known_L": problem.known_L,
    }
    if noise_sigma is not None:
        d["noise_sigma"] = float(noise_sigma)
    return d


def problem_from_dict(d: dict) -> VIProblem:
    """Rebuild a zoo problem from its JSON description.

    Constants are recomputed by the constructors from the parameters; any
    constants present in the dict are informational only.
    """
    kind = d.get("kind")
    params = d.get("params", {})
    label = d.get("label")
    if kind == "matrix_game":
        return make_matrix_game(np.asarray(params["A"], dtype=np.float64), label=label)
    if kind == "holder_1d":
        return make_holder_1d(float(params["nu"]), label=label)
    if kind == "affine":
        return make_affine_monotone(
            np.asarray(params["M"], dtype=np.float64),
            np.asarray(params["b"], dtype=np.float64),
            set_from_dict(params["set"]),
            label=label,
        )
    raise ValueError(f"unknown or non-serializable problem kind: {kind!r}")


def _random_psd_affine(n: int, seed: int, b_scale: float = 0.2) -> VIProblem:
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, n))
    sym = S @ S.T / n                 # PSD part
    skew = rng.standard_normal((n, n))
    skew = 0.5 * (skew - skew.T)
    b = b_scale * rng.standard_normal(n)
    return make_affine_monotone(sym + skew, b, Ball(np.zeros(n), 1.0),
                                label=f"affine-ball-{n}d-seed{seed}")


def suite_problems() -> list:
    """Canonical deterministic problem list used by the test suite."""
    rng_games = [np.random.default_rng(s).uniform(-1.0, 1.0, size=(3, 3)) for s in (11, 12, 13)]
    problems = [
        make_matrix_game(np.array([[0.0, 1.0], [-1.0, 0.0]]), label="matrix-game-2x2"),
    ]
    problems += [make_matrix_game(A, label=f"matrix-game-3x3-{i}") for i, A in enumerate(rng_games)]
    problems += [make_holder_1d(nu) for nu in (0.0, 0.5, 1.0)]
    problems.append(_random_psd_affine(3, seed=7))
    problems.append(
        make_affine_monotone(
            np.array([[1.0, 0.5], [-0.5, 1.0]]),
            np.array([0.2, -0.1]),
            Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0])),
            label="affine-box-2d",
        )
    )
    c = np.array([0.5, -0.3])
    problems.append(
        make_fixed_point(lambda x: 0.5 * (x + c),
                         Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0])),
                         label="contraction-2d", known_solution=c)
    )
    theta = np.pi / 4
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    problems.append(
        make_fixed_point(lambda x: R @ x, Ball(np.zeros(2), 1.0), label="rotation-2d",
                         known_solution=np.zeros(2))
    )
    return problems
