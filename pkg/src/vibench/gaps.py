"""Restricted-gap evaluation and related solution-quality certificates.

The restricted gap of a candidate x_hat is max over feasible y of
<g(y), x_hat - y>; it is nonnegative for feasible x_hat and zero exactly
at solutions.  Matrix games admit an exact closed form; everything else
at desk scale is handled by brute force over a grid or a vertex set,
which yields a certified LOWER bound on the true gap (the safe direction
for checking upper-bound dominance).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .sets import Ball, Box, FeasibleSet, Product, Simplex, _as_vector


class UnsupportedInstanceError(ValueError):
    """Instance too large for exact/brute-force gap evaluation."""


@dataclass(frozen=True, eq=False)
class GapResult:
    """Gap value, how it was obtained, and the maximizing point found."""

    value: float
    method: str  # closed_form | vertex_enum | grid
    witness: np.ndarray
    grid_spacing: float | None = None


def gap_matrix_game(A, u_hat, v_hat) -> GapResult:
    """Exact restricted gap of (u_hat, v_hat) for a bilinear game on simplices.

    For the field g(u, v) = (A v, -A^T u), the objective <g(y), w_hat - y>
    is linear in y because the bilinear cross terms cancel, so the max is
    attained at a vertex pair and collapses to
    max_j (A^T u_hat)_j - min_i (A v_hat)_i.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    m, n = A.shape
    u_hat = _as_vector(u_hat, m)
    v_hat = _as_vector(v_hat, n)
    for name, x in (("u_hat", u_hat), ("v_hat", v_hat)):
        if not (np.all(x >= -1e-8) and abs(float(x.sum()) - 1.0) <= 1e-8):
            raise ValueError(f"{name} is not on the probability simplex")
    by_col = A.T @ u_hat
    by_row = A @ v_hat
    j_star = int(np.argmax(by_col))
    i_star = int(np.argmin(by_row))
    value = float(by_col[j_star] - by_row[i_star])
    witness = np.zeros(m + n)
    witness[i_star] = 1.0
    witness[m + j_star] = 1.0
    return GapResult(value=value, method="closed_form", witness=witness)


def feasible_grid(feasible: FeasibleSet, resolution: int) -> tuple[np.ndarray, float]:
    """Member points covering the set, plus the grid spacing.

    ``resolution`` is the number of points per axis.  Limited to dimension
    <= 3; the point count grows with resolution**dimension.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if feasible.dimension > 3:
        raise UnsupportedInstanceError(
            f"grid evaluation limited to dimension <= 3, got {feasible.dimension}"
        )
    if isinstance(feasible, Box):
        axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(feasible.lower, feasible.upper)]
        pts = np.stack([c.ravel() for c in np.meshgrid(*axes, indexing="ij")], axis=1)
        spans = feasible.upper - feasible.lower
        return pts, float(np.max(spans)) / (resolution - 1)
    if isinstance(feasible, Ball):
        c, r = feasible.center, feasible.radius
        axes = [np.linspace(ci - r, ci + r, resolution) for ci in c]
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        inside = np.linalg.norm(pts - c, axis=1) <= r + 1e-12
        return pts[inside], 2.0 * r / (resolution - 1)
    if isinstance(feasible, Simplex):
        n = feasible.dim
        h = 1.0 / (resolution - 1)
        t = np.linspace(0.0, 1.0, resolution)
        if n == 1:
            return np.ones((1, 1)), 0.0
        if n == 2:
            return np.stack([t, 1.0 - t], axis=1), h
        if n == 3:
            a, b = np.meshgrid(t, t, indexing="ij")
            keep = a + b <= 1.0 + 1e-12
            a, b = a[keep], b[keep]
            return np.stack([a, b, 1.0 - a - b], axis=1), h
    if isinstance(feasible, Product):
        parts = [feasible_grid(f, resolution) for f in feasible.factors]
        rows = [np.concatenate(combo) for combo in itertools.product(*(p[0] for p in parts))]
        return np.asarray(rows), max(p[1] for p in parts)
    raise UnsupportedInstanceError(f"no grid generator for set kind {feasible.kind!r}")


def _vertex_candidates(feasible: FeasibleSet) -> np.ndarray | None:
    """Vertex set for products of simplices with at most 10 total vertices."""
    if isinstance(feasible, Simplex) and feasible.dim <= 10:
        return feasible.vertices()
    if isinstance(feasible, Product) and all(isinstance(f, Simplex) for f in feasible.factors):
        if sum(f.dim for f in feasible.factors) <= 10:
            return feasible.vertices()
    return None


def gap_bruteforce(op, feasible: FeasibleSet, w_hat, resolution: int = 10_001) -> GapResult:
    """Brute-force lower bound on the restricted gap of ``w_hat``.

    Maximizes <g(y), w_hat - y> over a uniform grid (dimension <= 3) or,
    for products of simplices with <= 10 total vertices, over the vertex
    set.  The vertex route is exact when the objective is linear in y (as
    for bilinear games) and a lower bound otherwise.  ``w_hat`` itself is
    always included as a candidate, so the result is >= 0 for feasible
    w_hat.
    """
    w_hat = _as_vector(w_hat, feasible.dimension)
    spacing = None
    if feasible.dimension <= 3:
        candidates, spacing = feasible_grid(feasible, resolution)
        method = "grid"
    else:
        candidates = _vertex_candidates(feasible)
        method = "vertex_enum"
        if candidates is None:
            raise UnsupportedInstanceError(
                "instance too large: need dimension <= 3 or a product of "
                "simplices with <= 10 total vertices"
            )
    if feasible.contains(w_hat):
        candidates = np.vstack([candidates, w_hat])
    best_val = -np.inf
    best_y = None
    for y in candidates:
        val = float(op(y) @ (w_hat - y))
        if val > best_val:
            best_val = val
            best_y = y
    return GapResult(value=best_val, method=method, witness=np.array(best_y),
                     grid_spacing=spacing)


def stampacchia_residual(op, feasible: FeasibleSet, x_hat, resolution: int = 10_001) -> float:
    """Brute-force strong-solution residual: max over grid x of <g(x_hat), x_hat - x>.

    A value <= eps certifies x_hat as an eps-approximate strong solution.
    The objective is linear in x, so the grid maximum is a lower bound
    that is exact up to the grid spacing at the boundary.
    """
    x_hat = _as_vector(x_hat, feasible.dimension)
    g_hat = op(x_hat)
    if feasible.dimension <= 3:
        candidates, _ = feasible_grid(feasible, resolution)
    else:
        candidates = _vertex_candidates(feasible)
        if candidates is None:
            raise UnsupportedInstanceError(
                "instance too large: need dimension <= 3 or a product of "
                "simplices with <= 10 total vertices"
            )
    # linear in x: max of <g_hat, x_hat> - <g_hat, x>
    return float(g_hat @ x_hat - np.min(candidates @ g_hat))


def suboptimality(f_value_at_w_hat: float, f_star: float) -> float:
    """f(w_hat) - f* for a minimization test problem with known optimum.

    Convexity sandwiches this between the two gap notions computed here:
    the roaming-point gap (max over y of <grad f(y), w_hat - y>, the
    quantity the certificates bound) is at most f(w_hat) - f*, which in
    turn is at most the strong residual of :func:`stampacchia_residual`.
    """
    return float(f_value_at_w_hat) - float(f_star)


def gap_power_1d(nu: float, w_hat: float) -> float:
    """Closed-form restricted gap on [-1, 1] for g(x) = sign(x)|x|^nu.

    The inner maximum sits at y = nu*w_hat/(1+nu), giving
    |w_hat|^(1+nu) * nu^nu / (1+nu)^(1+nu)  (with 0^0 = 1, so the nu=0
    case degenerates to |w_hat|).
    """
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")
    w = abs(float(w_hat))
    if w > 1.0 + 1e-12:
        raise ValueError("w_hat must lie in [-1, 1]")
    coeff = nu**nu / (1.0 + nu) ** (1.0 + nu) if nu > 0 else 1.0
    return w ** (1.0 + nu) * coeff


def default_gap_fn(problem):
    """Exact/brute-force gap callback for a problem, or None if unavailable.

    Matrix games get the closed form, the 1-D power family its closed
    form, and any other set of dimension <= 3 a grid lower bound.
    """
    if problem.kind == "matrix_game":
        A = np.asarray(problem.params["A"], dtype=np.float64)
        m = A.shape[0]

        def game_gap(w_hat):
            return gap_matrix_game(A, w_hat[:m], w_hat[m:]).value

        return game_gap
    if problem.kind == "holder_1d":
        nu = float(problem.params["nu"])
        return lambda w_hat: gap_power_1d(nu, float(w_hat[0]))
    if problem.set.dimension <= 3:
        # grid evaluation is pointwise; keep multi-dimensional grids modest
        resolution = {1: 10_001, 2: 201, 3: 41}[problem.set.dimension]
        op = problem.operator
        feasible = problem.set
        return lambda w_hat: gap_bruteforce(op, feasible, w_hat, resolution).value
    return None
