"""Feasible sets with exact Euclidean projections.

Every set knows its dimension, its exact Euclidean diameter, how to
project an arbitrary point onto itself, and how to draw uniform-ish
samples (used by the property samplers in :mod:`vibench.problems`).
Instances are immutable after construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


def _as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


class FeasibleSet:
    """Base class for compact convex sets with exact projections."""

    dimension: int
    kind: str = "abstract"

    def project(self, y) -> np.ndarray:
        """Euclidean projection of ``y`` onto the set."""
        raise NotImplementedError

    def diameter(self) -> float:
        """Exact Euclidean diameter, ``max ||x - y||`` over member pairs."""
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a random member point."""
        raise NotImplementedError

    def initial_point(self) -> np.ndarray:
        """Member point of minimal Euclidean norm (projection of the origin)."""
        return self.project(np.zeros(self.dimension))

    def vertices(self) -> np.ndarray | None:
        """Extreme points as rows, or None when the set is not polyhedral here."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    lower: np.ndarray
    upper: np.ndarray
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        lo = _as_vector(self.lower)
        hi = _as_vector(self.upper, lo.shape[0])
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper coordinatewise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def project(self, y) -> np.ndarray:
        y = _as_vector(y, self.dimension)
        return np.clip(y, self.lower, self.upper)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = _as_vector(x, self.dimension)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)

    def to_dict(self) -> dict:
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(FeasibleSet):
    center: np.ndarray
    radius: float
    kind: str = field(default="ball", init=False)

    def __post_init__(self):
        c = _as_vector(self.center)
        if not self.radius > 0:
            raise ValueError("ball requires radius > 0")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def project(self, y) -> np.ndarray:
        y = _as_vector(y, self.dimension)
        d = y - self.center
        nd = float(np.linalg.norm(d))
        if nd <= self.radius:
            return y
        return self.center + d * (self.radius / nd)

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = _as_vector(x, self.dimension)
        return float(np.linalg.norm(x - self.center)) <= self.radius + tol

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        n = self.dimension
        direction = rng.standard_normal(n)
        direction /= max(np.linalg.norm(direction), 1e-300)
        r = self.radius * rng.uniform() ** (1.0 / n)
        return self.center + r * direction

    def to_dict(self) -> dict:
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Simplex(FeasibleSet):
    """Probability simplex {x >= 0, sum x = 1} in the given dimension."""

    dim: int
    kind: str = field(default="simplex", init=False)

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("simplex requires dimension >= 1")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def dimension(self) -> int:
        return self.dim

    def project(self, y) -> np.ndarray:
        y = _as_vector(y, self.dim)
        return _project_simplex(y)

    def diameter(self) -> float:
        # extreme pair is any two distinct vertices e_i, e_j
        return float(np.sqrt(2.0)) if self.dim >= 2 else 0.0

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = _as_vector(x, self.dim)
        return bool(np.all(x >= -tol) and abs(float(x.sum()) - 1.0) <= tol)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(self.dim))

    def vertices(self) -> np.ndarray:
        return np.eye(self.dim)

    def to_dict(self) -> dict:
        return {"kind": "simplex", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Product(FeasibleSet):
    """Cartesian product of feasible sets; points are concatenated blocks."""

    factors: tuple
    kind: str = field(default="product", init=False)

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("product requires at least one factor")
        object.__setattr__(self, "factors", factors)
        offsets = np.cumsum([0] + [f.dimension for f in factors])
        slices = tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))
        object.__setattr__(self, "_slices", slices)
        object.__setattr__(self, "_dim", int(offsets[-1]))

    @property
    def dimension(self) -> int:
        return self._dim

    def blocks(self, x) -> list[np.ndarray]:
        x = _as_vector(x, self._dim)
        return [x[s] for s in self._slices]

    def project(self, y) -> np.ndarray:
        y = _as_vector(y, self._dim)
        return np.concatenate([f.project(y[s]) for f, s in zip(self.factors, self._slices)])

    def diameter(self) -> float:
        return float(np.sqrt(sum(f.diameter() ** 2 for f in self.factors)))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = _as_vector(x, self._dim)
        return all(f.contains(x[s], tol) for f, s in zip(self.factors, self._slices))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.concatenate([f.sample(rng) for f in self.factors])

    def vertices(self) -> np.ndarray | None:
        factor_vertices = []
        for f in self.factors:
            v = f.vertices()
            if v is None:
                return None
            factor_vertices.append(v)
        rows = [np.concatenate(combo) for combo in itertools.product(*factor_vertices)]
        return np.asarray(rows)

    def to_dict(self) -> dict:
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Exact O(n log n) sort-based projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.shape[0] + 1)
    positive = u - css / idx > 0
    rho = idx[positive][-1]
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def project(feasible: FeasibleSet, y) -> np.ndarray:
    """Euclidean projection of ``y`` onto ``feasible``."""
    return feasible.project(y)


def diameter(feasible: FeasibleSet) -> float:
    return feasible.diameter()


def initial_point(feasible: FeasibleSet) -> np.ndarray:
    return feasible.initial_point()


def set_from_dict(d: dict) -> FeasibleSet:
    """Rebuild a feasible set from its JSON description."""
    kind = d.get("kind")
    if kind == "box":
        return Box(np.asarray(d["lower"]), np.asarray(d["upper"]))
    if kind == "ball":
        return Ball(np.asarray(d["center"]), float(d["radius"]))
    if kind == "simplex":
        return Simplex(int(d["dim"]))
    if kind == "product":
        return Product(tuple(set_from_dict(f) for f in d["factors"]))
    raise ValueError(f"unknown set kind: {kind!r}")
