"""Stochastic variant of the adaptive mirror-prox solver.

Each iteration draws one fresh sample at z for the w step and one fresh
independent sample at w that is used for BOTH the z step and the L
update.  The two per-iteration draws come from disjoint generator
substreams spawned from the run seed, plus a third substream for the
initial ||g(z0, xi)|| estimate, so a run is bit-reproducible from
(problem, K, seed) alone.  With sigma = 0 the state sequence coincides
exactly with the deterministic solver's.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .gaps import default_gap_fn
from .operators import EvaluationError, StochasticOracle
from .problems import VIProblem, add_gaussian_noise
from .sets import FeasibleSet, _as_vector
from .solver import (
    RunReport,
    SolverError,
    SolverState,
    _advance,
    certificate_bound,
    checkpoint_schedule,
    l_floor,
    l_growth_bound,
    resolve_diameter,
)


@dataclass(frozen=True, eq=False)
class StochasticRunReport(RunReport):
    """Run report plus the seed, oracle-query count, and noise level."""

    seed: int = 0
    sample_count: int = 0
    sigma_used: float = 0.0


def sump_iterate(state: SolverState, oracle: StochasticOracle, feasible: FeasibleSet,
                 D: float, rng_z: np.random.Generator,
                 rng_w: np.random.Generator | None = None) -> SolverState:
    """One stochastic iteration; exactly two oracle queries.

    ``rng_z`` feeds the sample at z, ``rng_w`` the sample at w (defaults
    to ``rng_z`` when not given, which still yields independent draws).
    """
    if rng_w is None:
        rng_w = rng_z
    g_z = oracle.sample(state.z, rng_z)
    w, z_next, L_next = _advance(
        state.z, state.L, g_z, lambda w: oracle.sample(w, rng_w), feasible, D
    )
    return SolverState(z=z_next, L=L_next, w_sum=state.w_sum + w, k=state.k + 1)


def run_stochastic(problem: VIProblem, K: int, seed: int, *,
                   oracle: StochasticOracle | None = None, sigma: float = 0.0,
                   L0_override: float | None = None, D_override: float | None = None,
                   z0=None, gap_fn=None, dense_until: int = 1000,
                   growth: float = 1.1) -> StochasticRunReport:
    """Run the stochastic solver for K iterations, reproducibly per seed.

    When no oracle is supplied, the problem's operator is wrapped with
    isotropic Gaussian noise of level ``sigma``.  Exactly 2K + 1 oracle
    queries are made: one to initialize L0 and two per iteration.
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if oracle is None:
        oracle = add_gaussian_noise(problem, sigma)
    feasible = problem.set
    D = resolve_diameter(feasible, D_override)
    ss_init, ss_z, ss_w = np.random.SeedSequence(seed).spawn(3)
    rng_init = np.random.default_rng(ss_init)
    rng_z = np.random.default_rng(ss_z)
    rng_w = np.random.default_rng(ss_w)

    if z0 is None:
        z = feasible.initial_point()
    else:
        z = feasible.project(_as_vector(z0, feasible.dimension))
    warnings = []
    try:
        init_sample = oracle.sample(z, rng_init)
    except EvaluationError as e:
        raise SolverError("oracle evaluation failed at initialization",
                          iteration=0, point=e.point) from e
    sample_count = 1
    if L0_override is not None:
        if not L0_override > 0:
            raise ValueError("L0 override must be positive")
        L = float(L0_override)
    else:
        L = float(np.linalg.norm(init_sample))
        floor = l_floor(D)
        if L < floor:
            warnings.append(f"||g(z0, xi)|| = {L:.3e} below floor; starting from L0 = {floor:.3e}")
            L = floor
    L0 = L

    w_sum = np.zeros(feasible.dimension)
    schedule = checkpoint_schedule(K, dense_until, growth)
    ks, L_vals, certs, gaps = [], [], [], []
    next_idx = 0

    def sample_at_w(w_pt):
        return oracle.sample(w_pt, rng_w)

    t0 = time.perf_counter()
    for k in range(1, K + 1):
        try:
            g_z = oracle.sample(z, rng_z)
            w, z, L = _advance(z, L, g_z, sample_at_w, feasible, D)
        except EvaluationError as e:
            raise SolverError(
                f"oracle evaluation failed at iteration {k}", iteration=k, point=e.point
            ) from e
        sample_count += 2
        w_sum += w
        if k == schedule[next_idx]:
            ks.append(k)
            L_vals.append(L)
            certs.append(certificate_bound(D, L, k))
            if gap_fn is not None:
                gaps.append(float(gap_fn(w_sum / k)))
            next_idx += 1
    wall = time.perf_counter() - t0
    return StochasticRunReport(
        solver="ump_stochastic",
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
        seed=int(seed),
        sample_count=sample_count,
        sigma_used=float(oracle.sigma),
    )


def expected_l_growth_bound(k: int, D: float, nu: float, L_nu: float,
                            sigma: float, L0: float) -> float:
    """Bound on the mean adaptive coefficient after k stochastic iterations:
    2 (8k/D^2)^((1-nu)/2) L_nu + sqrt(8k) sigma / D + L0."""
    if sigma < 0 or L0 < 0:
        raise ValueError("sigma and L0 must be >= 0")
    return 2.0 * l_growth_bound(k, D, nu, L_nu) + math.sqrt(8.0 * k) * sigma / D + L0


def expected_gap_bound(k: int, D: float, nu: float, L_nu: float,
                       sigma: float, L0: float) -> float:
    """Bound on the mean restricted gap of the averaged iterate:
    32 (D^2/8k)^((1+nu)/2) L_nu + 32 D sigma / sqrt(8k) + 2 D^2 L0 / k."""
    if k < 1 or not D > 0 or not 0.0 <= nu <= 1.0 or L_nu < 0 or sigma < 0 or L0 < 0:
        raise ValueError("invalid bound arguments")
    return (
        32.0 * (D * D / (8.0 * k)) ** ((1.0 + nu) / 2.0) * L_nu
        + 32.0 * D / math.sqrt(8.0 * k) * sigma
        + 2.0 * D * D * L0 / k
    )


def mean_gap_estimate(problem: VIProblem, K: int, seeds, *, sigma: float = 0.0,
                      oracle: StochasticOracle | None = None, gap_fn=None,
                      **run_kwargs) -> tuple[float, float]:
    """Monte Carlo estimate of the mean gap of the averaged iterate.

    Runs one stochastic solve per seed, evaluates the exact gap oracle on
    each final averaged iterate, and returns (sample mean, standard
    error).  Needs at least two seeds for a standard error.
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("need at least 2 seeds")
    if gap_fn is None:
        gap_fn = default_gap_fn(problem)
        if gap_fn is None:
            raise ValueError(f"no exact gap oracle available for problem {problem.label!r}")
    values = []
    for seed in seeds:
        try:
            report = run_stochastic(problem, K, seed, oracle=oracle, sigma=sigma, **run_kwargs)
            values.append(float(gap_fn(report.w_hat)))
        except Exception as e:
            raise SolverError(f"seed {seed}: {e}") from e
    arr = np.asarray(values)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr)))
    return mean, stderr
