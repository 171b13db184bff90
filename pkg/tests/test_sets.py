import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibench import Ball, Box, Product, Simplex, diameter, initial_point, project, set_from_dict


def grid_simplex2(resolution=10_001):
    t = np.linspace(0.0, 1.0, resolution)
    return np.stack([t, 1.0 - t], axis=1)


def test_box_projection_clamps():
    box = Box([0.0, 0.0], [1.0, 1.0])
    assert np.allclose(project(box, [2.0, -1.0]), [1.0, 0.0])


def test_simplex_projection_fixes_members():
    s = Simplex(3)
    x = np.array([1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(project(s, x), x, atol=1e-15)


def test_simplex_projection_matches_segment_grid():
    # brute-force minimization of ||x - y||^2 over a 1e-4 grid of the segment
    s = Simplex(2)
    y = np.array([0.8, 0.4])
    assert np.allclose(project(s, y), [0.7, 0.3], atol=1e-12)
    pts = grid_simplex2()
    best = pts[np.argmin(((pts - y) ** 2).sum(axis=1))]
    assert np.allclose(project(s, y), best, atol=1e-4)


def test_simplex_projection_vs_grid_qp_dims_2_3(rng):
    # sampled cross-check against grid quadratic minimization (full battery
    # with 1e3 instances runs in the acceptance suite)
    s2, pts2 = Simplex(2), grid_simplex2(20_001)
    for _ in range(50):
        y = rng.uniform(-2, 2, size=2)
        p = project(s2, y)
        g = pts2[np.argmin(((pts2 - y) ** 2).sum(axis=1))]
        assert np.linalg.norm(p - g) <= 1e-4
    s3 = Simplex(3)
    t = np.linspace(0.0, 1.0, 301)
    a, b = np.meshgrid(t, t, indexing="ij")
    keep = a + b <= 1 + 1e-12
    pts3 = np.stack([a[keep], b[keep], 1 - a[keep] - b[keep]], axis=1)
    for _ in range(50):
        y = rng.uniform(-2, 2, size=3)
        p = project(s3, y)
        d_exact = ((p - y) ** 2).sum()
        d_grid = (((pts3 - y) ** 2).sum(axis=1)).min()
        assert d_exact <= d_grid + 1e-12          # exact projection beats every grid point
        assert abs(d_exact - d_grid) <= 1e-4      # and the grid gets within tolerance


def test_projection_dimension_mismatch():
    with pytest.raises(ValueError):
        project(Box([0.0], [1.0]), [1.0, 2.0])
    with pytest.raises(ValueError):
        project(Simplex(3), [0.1, 0.9])


def test_ball_projection():
    ball = Ball([1.0, 1.0], 0.5)
    y = np.array([1.0, 1.0 + 2.0])
    p = project(ball, y)
    assert np.allclose(p, [1.0, 1.5])
    inside = np.array([1.1, 1.1])
    assert np.allclose(project(ball, inside), inside)


def test_diameters():
    assert diameter(Ball([0.0, 0.0], 1.0)) == 2.0
    assert diameter(Box([0.0, 0.0], [1.0, 2.0])) == pytest.approx(np.sqrt(5.0))
    for n in (2, 3, 5):
        # brute-force max over vertex pairs e_i, e_j
        verts = np.eye(n)
        brute = max(
            np.linalg.norm(verts[i] - verts[j]) for i in range(n) for j in range(n)
        )
        assert diameter(Simplex(n)) == pytest.approx(brute)
        assert diameter(Simplex(n)) == pytest.approx(np.sqrt(2.0))
    prod = Product((Simplex(3), Simplex(3)))
    verts = prod.vertices()
    brute = max(
        np.linalg.norm(p - q) for p, q in itertools.product(verts, verts)
    )
    assert diameter(prod) == pytest.approx(2.0)
    assert brute == pytest.approx(2.0)


def test_initial_points():
    assert np.allclose(initial_point(Box(np.ones(4), np.full(4, 2.0))), np.ones(4))
    assert np.allclose(initial_point(Ball([0.3, -0.2], 1.0)), [0.0, 0.0])
    # grid minimization of ||u||^2 over the simplex
    for n, pts in ((2, grid_simplex2(2001)), (3, None)):
        s = Simplex(n)
        assert np.allclose(initial_point(s), np.full(n, 1.0 / n), atol=1e-12)
        if pts is not None:
            best = pts[np.argmin((pts**2).sum(axis=1))]
            assert np.allclose(initial_point(s), best, atol=1e-3)


@pytest.fixture(params=["box", "ball", "simplex", "product"])
def any_set(request):
    return {
        "box": Box([-1.0, 0.0, 2.0], [1.0, 0.5, 3.0]),
        "ball": Ball([0.5, -1.0], 2.0),
        "simplex": Simplex(4),
        "product": Product((Simplex(2), Box([-1.0], [1.0]), Ball([0.0], 1.0))),
    }[request.param]


def test_projection_idempotent_and_nonexpansive(any_set, rng):
    n = any_set.dimension
    for _ in range(200):
        y1 = rng.normal(scale=3.0, size=n)
        y2 = rng.normal(scale=3.0, size=n)
        p1, p2 = any_set.project(y1), any_set.project(y2)
        assert any_set.contains(p1, tol=1e-9)
        assert np.linalg.norm(any_set.project(p1) - p1) <= 1e-12
        assert np.linalg.norm(p1 - p2) <= np.linalg.norm(y1 - y2) + 1e-12


def test_projection_is_closest_among_samples(any_set, rng):
    for _ in range(50):
        y = rng.normal(scale=3.0, size=any_set.dimension)
        p = any_set.project(y)
        for _ in range(40):
            x = any_set.sample(rng)
            assert np.linalg.norm(p - y) <= np.linalg.norm(x - y) + 1e-12


def test_samples_are_members(any_set, rng):
    for _ in range(300):
        assert any_set.contains(any_set.sample(rng), tol=1e-9)


def test_diameter_dominates_sampled_distances(any_set, rng):
    d = any_set.diameter()
    for _ in range(300):
        x, y = any_set.sample(rng), any_set.sample(rng)
        assert np.linalg.norm(x - y) <= d + 1e-9


@settings(max_examples=200, deadline=None)
@given(
    v=st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=8)
)
def test_simplex_projection_properties(v):
    s = Simplex(len(v))
    p = s.project(np.asarray(v))
    assert abs(p.sum() - 1.0) <= 1e-9
    assert np.all(p >= -1e-12)
    assert np.linalg.norm(s.project(p) - p) <= 1e-12


def test_degenerate_simplex():
    s = Simplex(1)
    assert np.allclose(s.project(np.array([5.0])), [1.0])
    assert s.diameter() == 0.0
    assert s.contains(np.array([1.0]))


def test_invalid_sets_rejected():
    with pytest.raises(ValueError):
        Box([1.0], [0.0])
    with pytest.raises(ValueError):
        Ball([0.0], 0.0)
    with pytest.raises(ValueError):
        Simplex(0)
    with pytest.raises(ValueError):
        Product(())


def test_set_serialization_round_trip(any_set, rng):
    rebuilt = set_from_dict(any_set.to_dict())
    assert rebuilt.dimension == any_set.dimension
    assert rebuilt.diameter() == pytest.approx(any_set.diameter())
    for _ in range(20):
        y = rng.normal(scale=2.0, size=any_set.dimension)
        assert np.allclose(rebuilt.project(y), any_set.project(y), atol=1e-15)


def test_product_blocks():
    prod = Product((Simplex(2), Box([-1.0], [1.0])))
    blocks = prod.blocks(np.array([0.25, 0.75, 0.5]))
    assert np.allclose(blocks[0], [0.25, 0.75])
    assert np.allclose(blocks[1], [0.5])
    assert prod.dimension == 3
