"""
Simplicial Decomposition

Splits each enumerated cone into simplicial cones (N linearly independent
rays each). The skeleton is projected onto a base orthogonal to the cone
axis, the base is triangulated, and each simplex of the base triangulation
becomes one integration cell built from the original rays.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lu_factor
from scipy.optimize import linprog
from scipy.spatial import Delaunay, QhullError

from ..arrangement import Cone, numerical_rank, pattern_string
from ..errors import DegenerateConeError, DegenerateSimplexError

logger = logging.getLogger(__name__)

AXIS_TOL = 1e-9
DET_TOL = 1e-12
VOLUME_TOL = 1e-12
MEMBERSHIP_TOL = 1e-9

Simplex = tuple[int, ...]


# =============================================================================
# DATA TYPES
# =============================================================================


@dataclass(frozen=True, eq=False)
class BaseProjection:
    """
    Skeleton rays expressed in an orthonormal basis of the plane orthogonal
    to the cone axis.

    `points[i]` are the (N-1) coordinates of w_i - (w_i . a) a and
    `heights[i]` = w_i . a > 0.
    """

    axis: np.ndarray
    basis: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    heights: np.ndarray = field(repr=False)

    def slice_points(self) -> np.ndarray:
        """Intersections of the rays with the affine slice a . x = 1, in base coordinates."""
        return self.points / self.heights[:, None]


@dataclass(frozen=True, eq=False)
class SimplicialCone:
    """
    One integration cell: N rays of a parent cone, stored as rows.

    The generator matrix W has the rays as columns, so x = W lambda with
    lambda >= 0 sweeps the cell.
    """

    rays: np.ndarray = field(repr=False)
    abs_det: float
    parent_cone: int
    ray_indices: Simplex
    id: int = -1

    @property
    def N(self) -> int:
        return int(self.rays.shape[0])

    @property
    def generator_matrix(self) -> np.ndarray:
        return self.rays.T

    def coefficients(self, points: np.ndarray) -> np.ndarray:
        """Solve W lambda = x for each row x of `points`."""
        return np.linalg.solve(self.generator_matrix, np.atleast_2d(points).T).T

    def contains(self, points: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Boolean mask of points strictly inside the cell."""
        return np.all(self.coefficients(points) > tol, axis=1)


# =============================================================================
# AXIS AND BASE
# =============================================================================


def cone_axis(skeleton: np.ndarray) -> np.ndarray:
    """
    Unit axis with a . w > 0 for every skeleton ray w.

    The normalised ray sum is used when it qualifies; otherwise the direction
    maximising min_w a . w is found by linear programming.

    Raises:
        DegenerateConeError: if no direction has positive dot with all rays.
    """
    w = np.atleast_2d(np.asarray(skeleton, dtype=float))
    if w.shape[0] == 0:
        raise DegenerateConeError("empty skeleton")
    n = w.shape[1]

    total = w.sum(axis=0)
    norm = float(np.linalg.norm(total))
    if norm > 0.0:
        axis = total / norm
        if float(np.min(w @ axis)) > AXIS_TOL:
            return axis

    logger.debug("ray sum is not a valid axis; solving for the Chebyshev direction")
    # variables (a, t): maximise t subject to W a >= t, |a_i| <= 1, t <= 1
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-w, np.ones((w.shape[0], 1))])
    b_ub = np.zeros(w.shape[0])
    bounds = [(-1.0, 1.0)] * n + [(None, 1.0)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not result.success or result.x[-1] <= AXIS_TOL:
        raise DegenerateConeError("no direction has positive dot product with every ray")

    axis = result.x[:n] / np.linalg.norm(result.x[:n])
    if float(np.min(w @ axis)) <= AXIS_TOL:
        raise DegenerateConeError("axis fallback failed to separate the rays")
    return axis


def _orthonormal_complement(axis: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of e_1..e_N against the axis; returns (N-1, N) rows."""
    n = axis.shape[0]
    vectors = [axis]
    for e in np.eye(n):
        v = e.copy()
        for _ in range(2):
            for q in vectors:
                v -= (v @ q) * q
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            vectors.append(v / norm)
        if len(vectors) == n:
            break
    return np.vstack(vectors[1:])


def project_to_base(skeleton: np.ndarray, axis: np.ndarray) -> BaseProjection:
    """Coordinates of the rays' components orthogonal to the axis."""
    w = np.atleast_2d(np.asarray(skeleton, dtype=float))
    a = np.asarray(axis, dtype=float)
    basis = _orthonormal_complement(a)
    heights = w @ a
    points = (w - np.outer(heights, a)) @ basis.T
    return BaseProjection(axis=a, basis=basis, points=points, heights=heights)


# =============================================================================
# TRIANGULATION
# =============================================================================


def _simplex_volume(vertices: np.ndarray) -> float:
    d = vertices.shape[1]
    edges = vertices[1:] - vertices[0]
    return abs(float(np.linalg.det(edges))) / math.factorial(d)


def triangulate_base(points: np.ndarray) -> list[Simplex]:
    """
    Triangulate p points in dimension N-1 into N-point index tuples.

    Simplices have disjoint interiors and cover the convex hull. Tuples are
    sorted internally and returned in lexicographic order.

    Raises:
        DegenerateConeError: if p > N and the points do not span N-1 dimensions.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    p, d = pts.shape
    if p == d + 1:
        return [tuple(range(p))]
    if p < d + 1:
        raise DegenerateConeError(f"{p} points cannot form a {d}-simplex")

    if numerical_rank(pts - pts[0]) < d:
        raise DegenerateConeError(f"{p} base points do not span {d} dimensions")

    if d == 1:
        order = np.argsort(pts[:, 0], kind="stable")
        segments = [
            tuple(sorted((int(order[i]), int(order[i + 1])))) for i in range(p - 1)
        ]
        return sorted(segments)

    try:
        tri = Delaunay(pts)
    except QhullError as e:
        raise DegenerateConeError(f"base triangulation failed: {e}") from e

    volumes = np.array([_simplex_volume(pts[s]) for s in tri.simplices])
    keep = volumes > VOLUME_TOL * volumes.sum()
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        logger.debug("dropped %d flat simplices from base triangulation", dropped)
    return sorted(tuple(sorted(int(i) for i in s)) for s in tri.simplices[keep])


# =============================================================================
# CONE DECOMPOSITION
# =============================================================================


def generator_abs_det(rays: np.ndarray) -> float:
    """|det W| from the LU factorisation of the ray matrix."""
    lu, _ = lu_factor(np.asarray(rays, dtype=float).T)
    return float(np.abs(np.prod(np.diag(lu))))


def decompose_cone(cone: Cone) -> list[SimplicialCone]:
    """
    Split a cone into simplicial cones built from its original rays.

    The base is triangulated on the axis slice, where straight segments
    between ray tips correspond to planar cone faces.

    Raises:
        DegenerateSimplexError: if a cell has |det W| < 1e-12.
    """
    skeleton = cone.skeleton
    if cone.is_simplicial:
        tuples: list[Simplex] = [tuple(range(cone.N))]
    else:
        axis = cone_axis(skeleton)
        base = project_to_base(skeleton, axis)
        tuples = triangulate_base(base.slice_points())

    simplices: list[SimplicialCone] = []
    for indices in tuples:
        rays = skeleton[list(indices)]
        abs_det = generator_abs_det(rays)
        if abs_det < DET_TOL:
            raise DegenerateSimplexError(
                f"cone {cone.id} simplex {indices} has |det W| = {abs_det:.3e}"
            )
        simplices.append(
            SimplicialCone(rays=rays, abs_det=abs_det, parent_cone=cone.id, ray_indices=indices)
        )
    return simplices


def decompose_all(cones: list[Cone], threads: int = 1) -> list[SimplicialCone]:
    """Decompose every cone and number the resulting cells 0..nu-1 in cone order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_cone = list(pool.map(decompose_cone, cones))
    else:
        per_cone = [decompose_cone(cone) for cone in cones]

    simplices = [
        replace(simplex, id=i)
        for i, simplex in enumerate(s for group in per_cone for s in group)
    ]
    logger.info("%d cones decomposed into %d simplicial cones", len(cones), len(simplices))
    return simplices


def simplices_per_cone(simplices: list[SimplicialCone]) -> dict[int, int]:
    """Number of cells per parent cone id."""
    counts: dict[int, int] = {}
    for simplex in simplices:
        counts[simplex.parent_cone] = counts.get(simplex.parent_cone, 0) + 1
    return dict(sorted(counts.items()))


# =============================================================================
# DEBUG DUMP
# =============================================================================


def partition_dump(cones: list[Cone], simplices: list[SimplicialCone]) -> str:
    """
    Plain-text listing of every cone's rays and simplex index tuples, ordered
    by sign pattern string and then by tuple.
    """
    by_cone: dict[int, list[Simplex]] = {}
    for simplex in simplices:
        by_cone.setdefault(simplex.parent_cone, []).append(simplex.ray_indices)

    lines: list[str] = []
    for cone in sorted(cones, key=lambda c: pattern_string(c.pattern)):
        tuples = sorted(by_cone.get(cone.id, []))
        lines.append(
            f"cone {pattern_string(cone.pattern)} rays={cone.p} simplices={len(tuples)}"
        )
        for i, ray in enumerate(cone.skeleton):
            coords = " ".join(f"{v: .12f}" for v in ray)
            lines.append(f"  ray {i}: {coords}")
        for indices in tuples:
            lines.append(f"  simplex {' '.join(str(i) for i in indices)}")
    return "\n".join(lines) + "\n"


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "Simplex",
    "BaseProjection",
    "SimplicialCone",
    "cone_axis",
    "project_to_base",
    "triangulate_base",
    "generator_abs_det",
    "decompose_cone",
    "decompose_all",
    "simplices_per_cone",
    "partition_dump",
]
