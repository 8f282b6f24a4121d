import numpy as np
import pytest
from scipy.spatial import cKDTree

from dampedtop import MapParams
from dampedtop.attractor import (EmptyBallRangeError, PointCloud, correlation_counts,
                                 correlation_dimension, generate_attractor)


def circle(n, seed=0, radius=0.5):
    t = np.random.default_rng(seed).uniform(0, 2 * np.pi, n)
    return radius * np.column_stack([np.cos(t), np.sin(t), np.zeros(n)])


def sphere(n, seed=0):
    v = np.random.default_rng(seed).standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def test_counts_match_kdtree():
    pts = sphere(3000, 1)
    eps = np.logspace(-2, 0, 9)
    centers = np.arange(0, 3000, 7)
    tree = cKDTree(pts)
    ref = np.array([np.mean([len(tree.query_ball_point(pts[c], e)) - 1 for c in centers])
                    for e in eps])
    np.testing.assert_allclose(correlation_counts(pts, centers, eps), ref)


def test_circle_oracle():
    fit = correlation_dimension(PointCloud(circle(10_000)))
    assert fit.slope == pytest.approx(1.0, abs=0.05)


def test_sphere_oracle():
    fit = correlation_dimension(PointCloud(sphere(10_000)))
    assert fit.slope == pytest.approx(2.0, abs=0.1)


def test_attractor_is_fractal_at_r075():
    cloud = generate_attractor(MapParams.chaotic(0.75), 10_000, seed=0)
    assert len(cloud) == 10_000 and cloud.r_value == 0.75
    assert np.all(np.linalg.norm(cloud.points, axis=1) <= 1.0 + 1e-12)
    fit = correlation_dimension(cloud)
    assert fit.slope == pytest.approx(1.84, abs=0.1)
    a, b = fit.fit_range
    assert b - a >= 5
    assert fit.fit_rms < 0.05
    assert fit.dimension == fit.slope


def test_degenerate_cloud_has_no_scaling_range():
    # a fixed point: every neighbour is at distance 0, so log C is flat
    cloud = generate_attractor(MapParams.chaotic(0.2), 2_000)
    assert cloud.diameter < 1e-10
    fit = correlation_dimension(cloud)
    assert abs(fit.slope) < 1e-6


def test_too_sparse_raises():
    pts = np.random.default_rng(0).random((1000, 3)) * 100.0
    with pytest.raises(EmptyBallRangeError):
        correlation_dimension(pts, eps_grid=np.logspace(-3, -1, 10))


def test_argument_checks():
    with pytest.raises(ValueError):
        correlation_dimension(sphere(500))
    with pytest.raises(ValueError):
        correlation_dimension(sphere(2000), n_centers=5)
    with pytest.raises(ValueError):
        correlation_dimension(sphere(2000), eps_grid=[0.1, 0.2])
