"""Adaptive mirror-prox solver for monotone variational inequalities.

The method keeps a quadratic coefficient L that it grows online from
observed operator behaviour, so it needs neither the Hölder exponent nor
the Hölder constant of the operator.  One iteration from (z, L) is

    w      = prox_step(z, g(z), L)
    z_next = prox_step(z, g(w), L)
    L_next = L + max{0, (2 <g(w), w - z_next> - L ||z - z_next||^2)
                         / (D^2 + ||z - z_next||^2)}

and the solution estimate is the running average of the w iterates.  The
closed-form L update solves the implicit equation

    (L_next - L) D^2 / 2 = | <g(w), w - z_next> - (L_next/2) ||z - z_next||^2 |_+

exactly, which is what makes the per-iterate certificate
2 D^2 L_next / k a valid upper bound on the restricted gap of the
averaged iterate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .operators import EvaluationError
from .sets import FeasibleSet, _as_vector

# Below this, ||g(z0)|| is treated as zero and the initial L is floored so
# the first prox step stays defined; the L update recovers from there.
L_FLOOR_SCALE = 1e-12


class SolverError(RuntimeError):
    """A run aborted mid-iteration; carries the failing iteration index."""

    def __init__(self, message: str, iteration: int | None = None, point=None):
        super().__init__(message)
        self.iteration = iteration
        self.point = point


@dataclass(frozen=True, eq=False)
class SolverState:
    """Solver state after ``k`` completed iterations.

    ``w_sum`` accumulates the w iterates, so the candidate solution is
    ``w_sum / k``.  L never decreases across iterations.
    """

    z: np.ndarray
    L: float
    w_sum: np.ndarray
    k: int

    def w_hat(self) -> np.ndarray:
        if self.k < 1:
            raise ValueError("no completed iterations yet")
        return self.w_sum / self.k


@dataclass(frozen=True, eq=False)
class RunReport:
    """Trajectories and final averaged iterate of one solver run.

    Arrays are parallel over the logged checkpoints ``ks``; ``L_values[i]``
    is the adaptive coefficient after ``ks[i]`` iterations and
    ``certificates[i] = 2 D^2 L_values[i] / ks[i]``.  ``gaps`` holds the
    gap oracle evaluated at the running average (present only when a gap
    callback was supplied).
    """

    solver: str
    w_hat: np.ndarray
    iterations: int
    D: float
    L0: float
    ks: np.ndarray
    L_values: np.ndarray
    certificates: np.ndarray
    gaps: np.ndarray | None
    wall_time: float
    warnings: tuple = ()


def l_floor(D: float) -> float:
    return L_FLOOR_SCALE * max(1.0, D)


def l_update(L_k: float, inner: float, dz_sq: float, D: float) -> float:
    """Closed-form step of the adaptive coefficient.

    Returns L_k + max{0, (2*inner - L_k*dz_sq) / (D^2 + dz_sq)} where
    ``inner`` is <g(w), w - z_next> and ``dz_sq`` is ||z - z_next||^2.
    """
    if not (math.isfinite(D) and D > 0.0):
        raise ValueError(f"diameter must be positive and finite, got {D}")
    if not (math.isfinite(L_k) and L_k > 0.0):
        raise ValueError(f"L must be positive and finite, got {L_k}")
    if not math.isfinite(inner):
        raise ValueError(f"inner product must be finite, got {inner}")
    if not (math.isfinite(dz_sq) and dz_sq >= 0.0):
        raise ValueError(f"squared step must be finite and >= 0, got {dz_sq}")
    growth = 2.0 * inner - L_k * dz_sq
    if growth <= 0.0:
        return float(L_k)
    return L_k + growth / (D * D + dz_sq)


def _advance(z, L, g_z, g_at, feasible, D):
    """One iteration from (z, L); ``g_at`` supplies the second evaluation.

    Inlines prox_step (projection of z - g/L) so each candidate is
    validated once by the projection; operator outputs are already
    checked by their wrappers and L > 0 is maintained by l_update.
    """
    w = feasible.project(z - g_z / L)
    g_w = g_at(w)
    z_next = feasible.project(z - g_w / L)
    dz = z - z_next
    dz_sq = float(dz @ dz)
    inner = float(g_w @ (w - z_next))
    return w, z_next, l_update(L, inner, dz_sq, D)


def ump_iterate(state: SolverState, op, feasible: FeasibleSet, D: float) -> SolverState:
    """One deterministic iteration; exactly two operator evaluations."""
    w, z_next, L_next = _advance(state.z, state.L, op(state.z), op, feasible, D)
    return SolverState(z=z_next, L=L_next, w_sum=state.w_sum + w, k=state.k + 1)


def resolve_diameter(feasible: FeasibleSet, override: float | None = None) -> float:
    """Exact diameter of the set, or a validated user override.

    An override below the exact diameter is rejected: the certificate and
    the growth bounds are invalid for an undersized D.
    """
    exact = feasible.diameter()
    if override is None:
        if not exact > 0.0:
            raise ValueError("set has zero diameter; supply a positive override")
        return exact
    override = float(override)
    if not override > 0.0:
        raise ValueError("diameter override must be positive")
    if override < exact:
        raise ValueError(f"diameter override {override} is below the exact diameter {exact}")
    return override


def initial_state(op, feasible: FeasibleSet, D: float, L0_override: float | None = None,
                  z0=None) -> tuple[SolverState, list]:
    """Starting state: z0 minimizing ||u||^2 over the set, L0 = ||g(z0)||.

    A forced start is projected onto the set.  When ||g(z0)|| falls below
    the floor (z0 may already solve the problem), L0 is floored and a
    warning is returned.
    """
    if z0 is None:
        z = feasible.initial_point()
    else:
        z = feasible.project(_as_vector(z0, feasible.dimension))
    warnings = []
    if L0_override is not None:
        if not L0_override > 0:
            raise ValueError("L0 override must be positive")
        L = float(L0_override)
    else:
        L = float(np.linalg.norm(op(z)))
        floor = l_floor(D)
        if L < floor:
            warnings.append(f"||g(z0)|| = {L:.3e} below floor; starting from L0 = {floor:.3e}")
            L = floor
    return SolverState(z=z, L=L, w_sum=np.zeros(feasible.dimension), k=0), warnings


def checkpoint_schedule(K: int, dense_until: int = 1000, growth: float = 1.1) -> list:
    """Iterations at which trajectories are logged.

    Every iteration up to ``dense_until``, then a geometric thinning; the
    final iteration K is always included.  Keeps memory O(dense + log K)
    for long runs.
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if growth <= 1.0:
        raise ValueError("growth must exceed 1")
    dense = min(K, int(dense_until))
    ks = list(range(1, dense + 1))
    k = dense
    while k < K:
        k = min(K, max(k + 1, math.ceil(k * growth)))
        ks.append(k)
    return ks


def run(problem, K: int, L0_override: float | None = None, *, D_override: float | None = None,
        z0=None, gap_fn=None, dense_until: int = 1000, growth: float = 1.1) -> RunReport:
    """Run the adaptive solver for K iterations on a problem.

    ``problem`` needs ``operator`` and ``set`` attributes (see
    :class:`vibench.problems.VIProblem`).  ``gap_fn``, when given, is
    evaluated on the running average at every logged checkpoint and its
    values are stored in the report.
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    feasible = problem.set
    op = problem.operator
    D = resolve_diameter(feasible, D_override)
    try:
        state, warnings = initial_state(op, feasible, D, L0_override, z0)
    except EvaluationError as e:
        raise SolverError("operator evaluation failed at initialization",
                          iteration=0, point=e.point) from e
    z, L = state.z, state.L
    L0 = L
    w_sum = state.w_sum.copy()  # accumulated in place; never alias state
    schedule = checkpoint_schedule(K, dense_until, growth)
    ks, L_vals, certs, gaps = [], [], [], []
    next_idx = 0
    t0 = time.perf_counter()
    for k in range(1, K + 1):
        try:
            w, z, L = _advance(z, L, op(z), op, feasible, D)
        except EvaluationError as e:
            raise SolverError(
                f"operator evaluation failed at iteration {k}", iteration=k, point=e.point
            ) from e
        w_sum += w
        if k == schedule[next_idx]:
            ks.append(k)
            L_vals.append(L)
            certs.append(certificate_bound(D, L, k))
            if gap_fn is not None:
                gaps.append(float(gap_fn(w_sum / k)))
            next_idx += 1
    wall = time.perf_counter() - t0
    return RunReport(
        solver="ump",
        w_hat=w_sum / K,
        iterations=K,
        D=D,
        L0=L0,
        ks=np.asarray(ks, dtype=np.int64),
        L_values=np.asarray(L_vals),
        certificates=np.asarray(certs),
        gaps=np.asarray(gaps) if gap_fn is not None else None,
        wall_time=wall,
        warnings=tuple(warnings),
    )


def certificate_bound(D: float, L_next: float, k: int) -> float:
    """Computable gap certificate after k iterations: 2 D^2 L_next / k.

    Valid without knowing the operator's smoothness class; L_next is the
    adaptive coefficient after the k-th iteration.
    """
    if not (D > 0 and L_next > 0 and k >= 1):
        raise ValueError("certificate_bound requires D > 0, L_next > 0, k >= 1")
    return 2.0 * D * D * L_next / k


def _check_class_args(k: int, D: float, nu: float, L_nu: float) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not D > 0:
        raise ValueError("D must be positive")
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")
    if L_nu < 0:
        raise ValueError("L_nu must be >= 0")


def l_growth_bound(k: int, D: float, nu: float, L_nu: float) -> float:
    """A priori cap on the adaptive coefficient after k iterations.

    For an operator with Hölder exponent nu and constant L_nu on a set of
    diameter D: (8k / D^2)^((1-nu)/2) * L_nu.  Constant in k for nu = 1.
    """
    _check_class_args(k, D, nu, L_nu)
    return (8.0 * k / (D * D)) ** ((1.0 - nu) / 2.0) * L_nu


def gap_rate_bound(k: int, D: float, nu: float, L_nu: float) -> float:
    """Worst-case restricted gap of the averaged iterate after k iterations:
    16 L_nu D^(1+nu) / (8k)^((1+nu)/2)."""
    _check_class_args(k, D, nu, L_nu)
    return 16.0 * L_nu * D ** (1.0 + nu) / (8.0 * k) ** ((1.0 + nu) / 2.0)


def iterations_for_accuracy(eps: float, nu: float, L_nu: float, D: float) -> int:
    """Iterations sufficient for a restricted gap below eps:
    ceil((16 L_nu / eps)^(2/(1+nu)) * D^2 / 8)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    _check_class_args(1, D, nu, L_nu)
    return int(math.ceil((16.0 * L_nu / eps) ** (2.0 / (1.0 + nu)) * D * D / 8.0))
