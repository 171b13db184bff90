"""Operator abstractions and the shared Euclidean prox step.

A deterministic operator wraps a plain vector->vector function together
with optional Hölder metadata (exponent ``nu`` in [0, 1] and constant
``L_nu``).  A stochastic oracle wraps an unbiased noisy evaluator with a
variance bound ``sigma``.  Every evaluation is checked for NaN/Inf on the
spot: a non-finite value would silently poison the adaptive coefficient
for the rest of a run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sets import FeasibleSet, _as_vector


class EvaluationError(RuntimeError):
    """Operator returned a non-finite vector; carries the offending input."""

    def __init__(self, message: str, point: np.ndarray | None = None):
        super().__init__(message)
        self.point = point


def _checked(value, x: np.ndarray, what: str) -> np.ndarray:
    g = np.asarray(value, dtype=np.float64)
    if g.shape != x.shape:
        raise ValueError(f"{what} returned shape {g.shape}, expected {x.shape}")
    if not np.all(np.isfinite(g)):
        raise EvaluationError(f"{what} returned a non-finite vector", point=np.array(x))
    return g


@dataclass(frozen=True, eq=False)
class DeterministicOperator:
    """Monotone operator g: R^n -> R^n with optional Hölder metadata."""

    fn: Callable[[np.ndarray], np.ndarray]
    holder_exponent: float | None = None
    holder_constant: float | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return _checked(self.fn(x), x, "operator")


@dataclass(frozen=True, eq=False)
class StochasticOracle:
    """Unbiased noisy evaluator of a monotone operator.

    ``sample_fn(x, rng)`` must satisfy E[sample_fn(x, .)] = mean(x) with
    E||sample - mean||^2 <= sigma^2 uniformly over the feasible set.
    ``mean_operator`` is kept alongside for test problems where the exact
    mean is known.
    """

    sample_fn: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    mean_operator: DeterministicOperator
    sigma: float = 0.0

    def sample(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return _checked(self.sample_fn(x, rng), x, "stochastic oracle")


def prox_step(z: np.ndarray, g_val: np.ndarray, L: float, feasible: FeasibleSet) -> np.ndarray:
    """Minimizer of <g_val, x - z> + (L/2)||z - x||^2 over the set.

    Completing the square reduces the subproblem to a single projection of
    z - g_val/L; the quadratic makes it L-strongly convex, so the
    minimizer is unique.
    """
    if not L > 0:
        raise ValueError(f"prox_step requires L > 0, got {L}")
    z = _as_vector(z)
    g_val = _as_vector(g_val, z.shape[0])
    return feasible.project(z - g_val / L)


def monotonicity_deficit(
    op, feasible: FeasibleSet, n_pairs: int = 10_000, seed: int = 0
) -> float:
    """Most negative <g(x) - g(y), x - y> over sampled member pairs.

    A monotone operator keeps this >= 0 up to rounding; sampling cannot
    prove monotonicity but reliably catches sign mistakes.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        x = feasible.sample(rng)
        y = feasible.sample(rng)
        val = float((op(x) - op(y)) @ (x - y))
        worst = min(worst, val)
    return worst


def holder_ratio(
    op, feasible: FeasibleSet, nu: float, n_pairs: int = 10_000, seed: int = 0
) -> float:
    """Largest sampled ||g(x) - g(y)|| / ||x - y||^nu over member pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        x = feasible.sample(rng)
        y = feasible.sample(rng)
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            continue
        ratio = float(np.linalg.norm(op(x) - op(y))) / dist**nu
        worst = max(worst, ratio)
    return worst
