"""Exact two-codebook partition of the N=3 simplex under the uniform preference.

Points are kept in barycentric form (p1, p2, p3); areas and centroids are
computed in the (p1, p2) chart, an affine image of the triangle, so area
ratios and centroids carry over unchanged.
"""
from dataclasses import dataclass

import numpy as np

from modules.core.types import Codebook, CodebookSet
from modules.error_handler.errors import DimensionMismatch, InvalidDistribution, NoBoundary
from .options import DesignOptions

TRIANGLE = np.eye(3)
CHART_AREA = 0.5
ZERO_TOL = 1e-15


@dataclass(frozen=True)
class PartitionN3:
    """Region k holds the points encoded more cheaply by codebook k."""
    normal: np.ndarray
    boundary: tuple[np.ndarray, np.ndarray] | None
    regions: tuple[np.ndarray, np.ndarray]
    areas: tuple[float, float]
    centroids: tuple[np.ndarray | None, np.ndarray | None]

    def is_triangle(self, k: int) -> bool:
        return self.regions[k].shape[0] == 3


def _positive_pair(q1, q2) -> tuple[np.ndarray, np.ndarray]:
    q1 = q1.q if isinstance(q1, Codebook) else np.asarray(q1, dtype=float)
    q2 = q2.q if isinstance(q2, Codebook) else np.asarray(q2, dtype=float)
    if q1.shape != (3,) or q2.shape != (3,):
        raise DimensionMismatch("the exact partition is defined for N=3 only")
    if np.any(q1 <= 0) or np.any(q2 <= 0):
        raise InvalidDistribution("the exact partition needs strictly positive codebooks")
    return q1, q2


def clip_halfspace(polygon: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Part of a convex polygon with normal·p >= 0 (one Sutherland-Hodgman pass)."""
    out = []
    count = polygon.shape[0]
    for i in range(count):
        p, q = polygon[i], polygon[(i + 1) % count]
        fp, fq = float(normal @ p), float(normal @ q)
        if fp >= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 3)


def polygon_centroid(polygon: np.ndarray) -> tuple[float, np.ndarray | None]:
    """Area (as a fraction of the triangle) and area centroid of a polygon."""
    if polygon.shape[0] < 3:
        return 0.0, None
    x, y = polygon[:, 0], polygon[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if abs(area) <= ZERO_TOL:
        return 0.0, None
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return abs(area) / CHART_AREA, np.array([cx, cy, 1.0 - cx - cy])


def _boundary_points(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    points = []
    for i in range(3):
        p, q = TRIANGLE[i], TRIANGLE[(i + 1) % 3]
        fp, fq = float(normal @ p), float(normal @ q)
        if fp == 0:
            points.append(p)
        elif fp * fq < 0:
            points.append(p + fp / (fp - fq) * (q - p))
    unique = []
    for point in points:
        if not any(np.allclose(point, u, atol=1e-14) for u in unique):
            unique.append(point)
    return (unique[0], unique[1]) if len(unique) == 2 else None


def exact_partition_n3(q1, q2) -> PartitionN3:
    """Split the triangle by Σ p_n log(q1_n/q2_n) = 0.

    Codebook 1 owns the closed side where the sum is nonnegative.
    """
    q1, q2 = _positive_pair(q1, q2)
    normal = np.log(q1 / q2)
    if np.all(np.abs(normal) <= ZERO_TOL):
        raise NoBoundary("identical codebooks tie on the whole simplex")

    regions = (clip_halfspace(TRIANGLE, normal), clip_halfspace(TRIANGLE, -normal))
    (a1, c1), (a2, c2) = polygon_centroid(regions[0]), polygon_centroid(regions[1])
    return PartitionN3(
        normal=normal,
        boundary=_boundary_points(normal),
        regions=regions,
        areas=(a1, a2),
        centroids=(c1, c2),
    )


def exact_iteration_n3(q1, q2) -> tuple[np.ndarray, np.ndarray]:
    """One exact continuous update: each codebook moves to its region's
    centroid; a codebook whose region is empty stays put."""
    q1, q2 = _positive_pair(q1, q2)
    part = exact_partition_n3(q1, q2)
    c1, c2 = part.centroids
    return (q1 if c1 is None else c1), (q2 if c2 is None else c2)


@dataclass(frozen=True)
class ExactN3Result:
    codebooks: CodebookSet
    iterations: int
    converged: bool
    shifts: tuple[float, ...]


def design_exact_n3(q1, q2, opts: DesignOptions | None = None) -> ExactN3Result:
    """Iterate exact_iteration_n3 until no coordinate moves by more than opts.epsilon."""
    opts = opts or DesignOptions()
    a, b = _positive_pair(q1, q2)
    shifts = []
    converged = False
    iteration = 0
    for iteration in range(1, opts.max_iters + 1):
        na, nb = exact_iteration_n3(a, b)
        shift = float(max(np.abs(na - a).max(), np.abs(nb - b).max()))
        shifts.append(shift)
        a, b = na, nb
        if shift <= opts.epsilon:
            converged = True
            break
    return ExactN3Result(CodebookSet(np.vstack([a, b])), iteration, converged, tuple(shifts))
