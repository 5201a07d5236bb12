import numpy as np
import pytest

from modules.core.information import kl_matrix
from modules.designers.continuous import (
    SampleSet, evaluate_expected_bits, sample_uniform_simplex,
)
from modules.designers.geometry import (
    TRIANGLE, clip_halfspace, design_exact_n3, exact_iteration_n3, exact_partition_n3, polygon_centroid,
)
from modules.designers.options import DesignOptions
from modules.error_handler.errors import DimensionMismatch, InvalidDistribution, NoBoundary


def test_whole_triangle_centroid():
    area, centroid = polygon_centroid(TRIANGLE)
    assert area == pytest.approx(1.0)
    assert np.allclose(centroid, [1 / 3, 1 / 3, 1 / 3])


def test_clip_keeps_nonnegative_side():
    half = clip_halfspace(TRIANGLE, np.array([1.0, -1.0, 0.0]))
    assert np.all(half @ np.array([1.0, -1.0, 0.0]) >= -1e-15)
    assert polygon_centroid(half)[0] == pytest.approx(0.5)


def test_symmetric_split():
    part = exact_partition_n3([0.5, 0.25, 0.25], [0.25, 0.5, 0.25])
    assert part.areas[0] == pytest.approx(0.5)
    assert part.areas[1] == pytest.approx(0.5)
    assert part.is_triangle(0) and part.is_triangle(1)
    # vertices e1, e3 and the midpoint of e1e2
    assert np.allclose(part.centroids[0], [0.5, 1 / 6, 1 / 3])
    assert part.boundary is not None


def test_triangle_region_is_vertex_average():
    part = exact_partition_n3([0.8, 0.1, 0.1], [0.1, 0.45, 0.45])
    k = 0 if part.is_triangle(0) else 1
    assert part.is_triangle(k)
    assert np.allclose(part.centroids[k], part.regions[k].mean(axis=0))


def test_areas_sum_to_one():
    rng = np.random.default_rng(0)
    for q1, q2 in rng.dirichlet(np.ones(3), size=(10, 2)):
        part = exact_partition_n3(q1, q2)
        assert sum(part.areas) == pytest.approx(1.0)


def test_centroids_match_monte_carlo():
    rng = np.random.default_rng(1)
    points = sample_uniform_simplex(np.random.default_rng(2), 40_000, 3)
    for q1, q2 in rng.dirichlet(np.full(3, 2.0), size=(5, 2)):
        part = exact_partition_n3(q1, q2)
        owner = np.argmin(kl_matrix(points, np.vstack([q1, q2])), axis=1)
        for k in range(2):
            members = points[owner == k]
            if part.areas[k] < 0.05:
                continue
            assert part.areas[k] == pytest.approx(members.shape[0] / points.shape[0], abs=0.02)
            assert np.allclose(part.centroids[k], members.mean(axis=0), atol=0.02)


def test_identical_codebooks_have_no_boundary():
    with pytest.raises(NoBoundary):
        exact_partition_n3([0.2, 0.3, 0.5], [0.2, 0.3, 0.5])


def test_inputs_must_be_positive_n3():
    with pytest.raises(InvalidDistribution):
        exact_partition_n3([0.5, 0.5, 0.0], [0.2, 0.3, 0.5])
    with pytest.raises(DimensionMismatch):
        exact_partition_n3([0.25] * 4, [0.1, 0.2, 0.3, 0.4])


def test_iteration_moves_to_centroids():
    q1, q2 = [0.5, 0.25, 0.25], [0.25, 0.5, 0.25]
    n1, n2 = exact_iteration_n3(q1, q2)
    assert np.allclose(n1, [0.5, 1 / 6, 1 / 3])
    assert np.allclose(n2, [1 / 6, 0.5, 1 / 3])


def test_design_reaches_fixed_point():
    result = design_exact_n3([0.6, 0.2, 0.2], [0.2, 0.4, 0.4], DesignOptions(epsilon=1e-10, max_iters=500))
    assert result.converged
    q1, q2 = result.codebooks.matrix
    n1, n2 = exact_iteration_n3(q1, q2)
    assert np.allclose(n1, q1, atol=1e-8) and np.allclose(n2, q2, atol=1e-8)


@pytest.mark.slow
def test_exact_design_expected_bits():
    result = design_exact_n3([0.6, 0.2, 0.2], [0.2, 0.4, 0.4], DesignOptions(epsilon=1e-10, max_iters=500))
    points = sample_uniform_simplex(np.random.default_rng(5), 100_000, 3)
    bits = evaluate_expected_bits(result.codebooks, SampleSet(points), 20)
    assert 28.7 <= bits <= 29.4
