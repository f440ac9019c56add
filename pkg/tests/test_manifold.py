import numpy as np
import pytest

from stiefelnet import (
    DimensionMismatchError,
    RankDeficientError,
    induced_mean,
    is_on_manifold,
    is_tangent_at,
    procrustes_distance,
    project_to_manifold,
    project_to_tangent,
    random_stiefel,
    random_tangent,
)


def test_projection_fixes_embedded_identity():
    y = np.zeros((6, 3))
    y[:3, :3] = np.eye(3)
    assert np.array_equal(project_to_manifold(y), y)


def test_projection_ignores_positive_scaling():
    x = random_stiefel(7, 3, np.random.default_rng(4))
    assert np.allclose(project_to_manifold(2.5 * x), x, atol=1e-12)


def test_projection_is_nearest_point():
    # sampling oracle: no random feasible point beats the polar factor
    rng = np.random.default_rng(42)
    y = rng.standard_normal((6, 3))
    p = project_to_manifold(y)
    best = np.linalg.norm(y - p)
    for _ in range(1000):
        z = random_stiefel(6, 3, rng)
        assert best <= np.linalg.norm(y - z) + 1e-12


def test_projection_rejects_rank_deficient():
    y = np.zeros((5, 2))
    y[:, 0] = 1.0  # second column identically zero
    with pytest.raises(RankDeficientError):
        project_to_manifold(y)


def test_projection_idempotent():
    rng = np.random.default_rng(8)
    for _ in range(20):
        p = project_to_manifold(rng.standard_normal((9, 4)))
        assert np.linalg.norm(project_to_manifold(p) - p) <= 1e-10


def test_tangent_projection_of_base_point_is_zero():
    x = random_stiefel(5, 2, np.random.default_rng(1))
    assert np.linalg.norm(project_to_tangent(x, x)) <= 1e-12


def test_tangent_projection_idempotent_and_leaves_tangents_alone():
    rng = np.random.default_rng(2)
    x = random_stiefel(5, 2, rng)
    g = rng.standard_normal((5, 2))
    v = project_to_tangent(x, g)
    assert is_tangent_at(x, v)
    assert np.allclose(project_to_tangent(x, v), v, atol=1e-12)


def test_tangent_residual_orthogonal_to_tangent_space():
    rng = np.random.default_rng(7)
    x = random_stiefel(5, 2, rng)
    g = rng.standard_normal((5, 2))
    residual = g - project_to_tangent(x, g)
    for _ in range(100):
        h = random_tangent(x, rng)
        assert abs(np.sum(residual * h)) <= 1e-10


def test_tangent_projection_self_adjoint():
    rng = np.random.default_rng(12)
    x = random_stiefel(6, 3, rng)
    for _ in range(25):
        g = rng.standard_normal((6, 3))
        h = rng.standard_normal((6, 3))
        lhs = np.sum(project_to_tangent(x, g) * h)
        rhs = np.sum(g * project_to_tangent(x, h))
        assert abs(lhs - rhs) <= 1e-10


def test_tangent_projection_shape_check():
    x = random_stiefel(5, 2, np.random.default_rng(0))
    with pytest.raises(DimensionMismatchError):
        project_to_tangent(x, np.zeros((5, 3)))


def test_induced_mean_of_identical_points():
    x = random_stiefel(6, 2, np.random.default_rng(3))
    assert np.allclose(induced_mean([x, x]), x, atol=1e-12)
    assert np.allclose(induced_mean([x, x, x, x]), x, atol=1e-12)


def test_induced_mean_equals_projected_average_and_minimizes_spread():
    rng = np.random.default_rng(3)
    x = random_stiefel(8, 3, rng)
    points = [project_to_manifold(x + 0.1 * rng.standard_normal((8, 3))) for _ in range(4)]
    xbar = induced_mean(points)
    assert np.allclose(xbar, project_to_manifold(np.mean(points, axis=0)), atol=1e-12)
    spread = sum(np.linalg.norm(p - xbar) ** 2 for p in points)
    for _ in range(500):
        y = random_stiefel(8, 3, rng)
        assert spread <= sum(np.linalg.norm(p - y) ** 2 for p in points) + 1e-12


def test_procrustes_distance_zero_cases():
    rng = np.random.default_rng(11)
    x = random_stiefel(7, 4, rng)
    assert procrustes_distance(x, x) <= 1e-12
    q = project_to_manifold(rng.standard_normal((4, 4)))  # random orthogonal
    assert procrustes_distance(x @ q, x) <= 1e-10


def test_procrustes_distance_matches_rotation_search():
    rng = np.random.default_rng(5)
    x = random_stiefel(6, 2, rng)
    y = random_stiefel(6, 2, rng)
    exact = procrustes_distance(x, y)
    # brute force over 1e5 Haar-random orthogonal 2x2; QR alone fixes the
    # determinant sign, so flip columns to cover rotations and reflections
    qs = np.linalg.qr(rng.standard_normal((100_000, 2, 2)))[0]
    qs *= np.where(rng.random((100_000, 1, 2)) < 0.5, -1.0, 1.0)
    dists = np.linalg.norm(x @ qs - y, axis=(1, 2))
    assert exact <= dists.min() + 1e-12
    assert dists.min() - exact <= 1e-3


def test_procrustes_shape_check():
    rng = np.random.default_rng(0)
    with pytest.raises(DimensionMismatchError):
        procrustes_distance(random_stiefel(6, 2, rng), random_stiefel(6, 3, rng))


def test_random_stiefel_feasibility_and_determinism():
    x = random_stiefel(3, 3, np.random.default_rng(1))
    assert np.linalg.norm(x.T @ x - np.eye(3)) <= 1e-12
    col = random_stiefel(10, 1, np.random.default_rng(2))
    assert abs(np.linalg.norm(col) - 1.0) <= 1e-12
    a = random_stiefel(8, 3, np.random.default_rng(9))
    b = random_stiefel(8, 3, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_feasibility_predicate_rejects_nonfinite():
    x = random_stiefel(4, 2, np.random.default_rng(0))
    bad = x.copy()
    bad[0, 0] = np.nan
    assert is_on_manifold(x)
    assert not is_on_manifold(bad)


# geometry property suite -------------------------------------------------


def lipschitz_ratios(pairs: int = 1000, delta: float = 0.3, seed: int = 100):
    """Projection Lipschitz oracle: ratios ||P(x)-P(y)|| / ||x-y|| for random
    pairs inside the delta-tube around the manifold."""
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(pairs):
        p = random_stiefel(6, 3, rng)
        ex = rng.standard_normal((6, 3))
        ex *= rng.uniform(0, delta) / np.linalg.norm(ex)
        x = p + ex
        if rng.random() < 0.5:
            # nearby pair: stresses the local Lipschitz constant
            ey = rng.standard_normal((6, 3))
            y = x + (rng.uniform(0, 0.05) / np.linalg.norm(ey)) * ey
            if np.linalg.norm(y - project_to_manifold(y)) > delta:
                continue
        else:
            q = random_stiefel(6, 3, rng)
            ey = rng.standard_normal((6, 3))
            y = q + (rng.uniform(0, delta) / np.linalg.norm(ey)) * ey
        if np.linalg.norm(x - y) < 1e-9:
            continue
        ratios.append(
            np.linalg.norm(project_to_manifold(x) - project_to_manifold(y))
            / np.linalg.norm(x - y)
        )
    return np.asarray(ratios)


def test_projection_lipschitz_inside_tube():
    ratios = lipschitz_ratios()
    assert ratios.max() <= 1.0 / (1.0 - 0.3) + 1e-6


def second_order_projection_residuals(epsilons, seed: int = 101):
    """Residual ||P(x + u) - x - P_tangent(u)|| for one fixed direction u
    rescaled to each epsilon; quadratic behavior gives ratio ~4 per halving."""
    rng = np.random.default_rng(seed)
    x = random_stiefel(6, 3, rng)
    u = rng.standard_normal((6, 3))
    u /= np.linalg.norm(u)
    out = []
    for eps in epsilons:
        step = eps * u
        out.append(np.linalg.norm(project_to_manifold(x + step) - x
                                  - project_to_tangent(x, step)))
    return out


def test_projection_second_order_residual_scales_quadratically():
    res = second_order_projection_residuals([0.1, 0.05, 0.025])
    for larger, smaller in zip(res, res[1:]):
        assert 3.0 <= larger / smaller <= 5.0


def mean_gap_at_spread(eps: float, seed: int = 102):
    """Gap between induced mean and Euclidean average for n=8 points at a
    given spread scale (same perturbation directions across scales)."""
    rng = np.random.default_rng(seed)
    x = random_stiefel(8, 3, rng)
    dirs = [rng.standard_normal((8, 3)) for _ in range(8)]
    dirs = [u / np.linalg.norm(u) for u in dirs]
    points = [project_to_manifold(x + eps * u) for u in dirs]
    return np.linalg.norm(induced_mean(points) - np.mean(points, axis=0))


def test_mean_proximity_scales_quadratically():
    ratio = mean_gap_at_spread(0.1) / mean_gap_at_spread(0.05)
    assert 3.0 <= ratio <= 5.0
