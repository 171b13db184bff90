"""Fixed-step extragradient baseline.

The classic two-projection scheme with a constant step: the reference
trajectory against which the adaptive solver is compared, and the
long-run solution oracle for problems without a closed-form equilibrium.
Unlike the adaptive solver it must be told the Lipschitz constant (step
1/L1), which is exactly the knowledge the adaptive method does without.
"""

from __future__ import annotations

import time

import numpy as np

from .operators import EvaluationError
from .solver import RunReport, SolverError, checkpoint_schedule, resolve_diameter


def extragradient_fixed(problem, K: int, step: float, *, gap_fn=None, z0=None,
                        D_override: float | None = None, dense_until: int = 1000,
                        growth: float = 1.1) -> RunReport:
    """Constant-step extragradient for K iterations.

    w = P(z - step g(z)); z_next = P(z - step g(w)); the candidate
    solution is the running average of w.  The report's L column carries
    the constant 1/step; no gap certificate applies, so certificates are
    NaN.
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if not step > 0:
        raise ValueError("step must be positive")
    feasible = problem.set
    op = problem.operator
    D = resolve_diameter(feasible, D_override)
    z = feasible.initial_point() if z0 is None else feasible.project(np.asarray(z0, dtype=np.float64))
    w_sum = np.zeros(feasible.dimension)
    schedule = checkpoint_schedule(K, dense_until, growth)
    ks, gaps = [], []
    next_idx = 0
    t0 = time.perf_counter()
    for k in range(1, K + 1):
        try:
            w = feasible.project(z - step * op(z))
            z = feasible.project(z - step * op(w))
        except EvaluationError as e:
            raise SolverError(
                f"operator evaluation failed at iteration {k}", iteration=k, point=e.point
            ) from e
        w_sum += w
        if k == schedule[next_idx]:
            ks.append(k)
            if gap_fn is not None:
                gaps.append(float(gap_fn(w_sum / k)))
            next_idx += 1
    wall = time.perf_counter() - t0
    n_logged = len(ks)
    return RunReport(
        solver="extragradient_fixed",
        w_hat=w_sum / K,
        iterations=K,
        D=D,
        L0=1.0 / step,
        ks=np.asarray(ks, dtype=np.int64),
        L_values=np.full(n_logged, 1.0 / step),
        certificates=np.full(n_logged, np.nan),
        gaps=np.asarray(gaps) if gap_fn is not None else None,
        wall_time=wall,
    )
