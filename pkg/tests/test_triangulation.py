"""Tests for cone axes, base projection, triangulation and decomposition."""

import math

import numpy as np
import pytest

from conecubature.arrangement import Cone, enumerate_cones, get_matrix, registry_names
from conecubature.errors import DegenerateConeError, DegenerateSimplexError
from conecubature.triangulation import (
    SimplicialCone,
    cone_axis,
    decompose_all,
    decompose_cone,
    generator_abs_det,
    partition_dump,
    project_to_base,
    simplices_per_cone,
    triangulate_base,
)


def _unit(*vectors) -> np.ndarray:
    a = np.asarray(vectors, dtype=float)
    return a / np.linalg.norm(a, axis=1)[:, None]


def _pyramid() -> Cone:
    """Square pyramid around e3: four rays, not simplicial."""
    skeleton = _unit((1, 1, 1), (-1, 1, 1), (-1, -1, 1), (1, -1, 1))
    return Cone(pattern=(1, 1, 1, 1), skeleton=skeleton, id=0)


def _membership_counts(simplices: list[SimplicialCone], x: np.ndarray) -> np.ndarray:
    counts = np.zeros(len(x), dtype=int)
    for simplex in simplices:
        counts += simplex.contains(x)
    return counts


# =============================================================================
# AXIS AND PROJECTION TESTS
# =============================================================================


class TestConeAxis:
    """Tests for cone_axis."""

    def test_two_rays(self):
        """Test the axis of {e1, e2} is the diagonal."""
        axis = cone_axis(np.eye(2))

        assert np.allclose(axis, np.array([1, 1]) / math.sqrt(2))

    def test_three_rays(self):
        """Test the axis of the positive octant."""
        axis = cone_axis(np.eye(3))

        assert np.allclose(axis, np.ones(3) / math.sqrt(3))

    def test_narrow_cone(self):
        """Test an 80 degree cone keeps positive dots."""
        theta = math.radians(80)
        skeleton = np.array([[1.0, 0.0], [math.cos(theta), math.sin(theta)]])

        axis = cone_axis(skeleton)

        assert np.all(skeleton @ axis > 0)
        assert np.allclose(axis, skeleton.sum(axis=0) / np.linalg.norm(skeleton.sum(axis=0)))

    def test_fallback_for_lopsided_cone(self):
        """Test rays clustered on one side still get a separating axis."""
        angles = np.radians([0.0, 10.0, 20.0, 170.0])
        skeleton = np.column_stack([np.cos(angles), np.sin(angles)])
        total = skeleton.sum(axis=0)
        assert np.min(skeleton @ (total / np.linalg.norm(total))) < 0

        axis = cone_axis(skeleton)

        assert np.isclose(np.linalg.norm(axis), 1.0)
        assert np.all(skeleton @ axis > 1e-9)

    def test_line_has_no_axis(self):
        """Test opposite rays cannot be separated."""
        with pytest.raises(DegenerateConeError):
            cone_axis(np.array([[1.0, 0.0], [-1.0, 0.0]]))


class TestProjectToBase:
    """Tests for project_to_base."""

    def test_quadrant(self):
        """Test {e1, e2} projects to +-1/sqrt(2)."""
        base = project_to_base(np.eye(2), cone_axis(np.eye(2)))

        assert base.points.shape == (2, 1)
        assert np.allclose(sorted(base.points[:, 0]), [-1 / math.sqrt(2), 1 / math.sqrt(2)])
        assert np.allclose(base.heights, 1 / math.sqrt(2))

    def test_ray_along_axis(self):
        """Test a ray parallel to the axis projects to the origin."""
        axis = np.array([0.0, 0.0, 1.0])
        skeleton = np.vstack([axis, _unit((1, 0, 1), (0, 1, 1))])

        base = project_to_base(skeleton, axis)

        assert np.allclose(base.points[0], 0.0)

    def test_octant_equilateral(self):
        """Test the octant rays project to an equilateral triangle."""
        base = project_to_base(np.eye(3), cone_axis(np.eye(3)))

        p = base.points
        sides = [np.linalg.norm(p[i] - p[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
        assert np.allclose(sides, sides[0])

    def test_basis_orthonormal(self):
        """Test the basis is orthonormal and orthogonal to the axis."""
        skeleton = _pyramid().skeleton
        axis = cone_axis(skeleton)

        base = project_to_base(skeleton, axis)

        assert np.allclose(base.basis @ base.basis.T, np.eye(2), atol=1e-12)
        assert np.allclose(base.basis @ axis, 0.0, atol=1e-12)
        assert np.all(base.heights > 0)


# =============================================================================
# TRIANGULATION TESTS
# =============================================================================


class TestTriangulateBase:
    """Tests for triangulate_base."""

    def test_simplex_short_circuit(self):
        """Test p = N returns the single simplex."""
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

        assert triangulate_base(points) == [(0, 1, 2)]

    def test_interval_chain(self):
        """Test collinear points in a 1-D base form a chain of segments."""
        points = np.array([[0.0], [1.0], [2.0], [3.0]])

        assert triangulate_base(points) == [(0, 1), (1, 2), (2, 3)]

    def test_interval_chain_unsorted(self):
        """Test the chain follows coordinate order, not input order."""
        points = np.array([0.3, -1.0, 2.0, 0.5])

        assert triangulate_base(points) == [(0, 1), (0, 3), (2, 3)]

    def test_square(self):
        """Test a square splits into two triangles covering its area."""
        points = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

        simplices = triangulate_base(points)

        assert len(simplices) == 2
        area = sum(
            abs(np.linalg.det(points[list(s[1:])] - points[s[0]])) / 2 for s in simplices
        )
        assert abs(area - 1.0) < 1e-10

    def test_hexagon_with_center(self):
        """Test tuples are sorted and cover the hull."""
        angles = np.linspace(0, 2 * np.pi, 6, endpoint=False)
        points = np.vstack([[0.0, 0.0], np.column_stack([np.cos(angles), np.sin(angles)])])

        simplices = triangulate_base(points)

        assert simplices == sorted(simplices)
        assert all(list(s) == sorted(s) for s in simplices)
        area = sum(
            abs(np.linalg.det(points[list(s[1:])] - points[s[0]])) / 2 for s in simplices
        )
        assert abs(area - 1.5 * math.sqrt(3)) < 1e-10

    def test_collinear_points_rejected(self):
        """Test points that do not span the base dimension."""
        points = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])

        with pytest.raises(DegenerateConeError, match="span"):
            triangulate_base(points)

    def test_too_few_points(self):
        """Test p < N."""
        with pytest.raises(DegenerateConeError):
            triangulate_base(np.array([[0.0, 0.0], [1.0, 0.0]]))


# =============================================================================
# DECOMPOSITION TESTS
# =============================================================================


class TestDecomposeCone:
    """Tests for decompose_cone and decompose_all."""

    def test_quadrant(self):
        """Test a quadrant is already simplicial."""
        cone = Cone(pattern=(1, 1), skeleton=np.eye(2), id=3)

        simplices = decompose_cone(cone)

        assert len(simplices) == 1
        assert np.allclose(simplices[0].generator_matrix, np.eye(2))
        assert simplices[0].abs_det == pytest.approx(1.0)
        assert simplices[0].parent_cone == 3

    def test_pyramid(self):
        """Test a square-based cone splits into two simplicial cones."""
        cone = _pyramid()

        simplices = decompose_cone(cone)

        assert len(simplices) == 2
        for simplex in simplices:
            assert simplex.N == 3
            assert simplex.abs_det > 1e-12
            # rays are copied from the skeleton, not recomputed
            assert np.array_equal(simplex.rays, cone.skeleton[list(simplex.ray_indices)])

    def test_pyramid_partition(self):
        """Test directions inside the pyramid fall in exactly one cell."""
        cone = _pyramid()
        simplices = decompose_cone(cone)
        rng = np.random.default_rng(11)

        x = rng.standard_normal((50_000, 3))
        inside = x[np.all(np.abs(x[:, :2]) < x[:, 2:3], axis=1)]

        assert len(inside) > 1000
        assert np.all(_membership_counts(simplices, inside) == 1)

    def test_degenerate_simplex(self):
        """Test nearly parallel rays are rejected."""
        skeleton = _unit((1.0, 0.0), (1.0, 1e-14))

        with pytest.raises(DegenerateSimplexError):
            decompose_cone(Cone(pattern=(1, 1), skeleton=skeleton, id=0))

    def test_generator_abs_det(self):
        """Test |det W| ignores orientation."""
        rays = np.array([[0.0, 2.0], [3.0, 0.0]])

        assert generator_abs_det(rays) == pytest.approx(6.0)

    def test_c3x2(self):
        """Test the six planar sectors give six simplicial cones."""
        cones = enumerate_cones(get_matrix("C3x2"))

        simplices = decompose_all(cones)

        assert len(simplices) == 6
        assert [s.id for s in simplices] == list(range(6))
        assert simplices_per_cone(simplices) == {i: 1 for i in range(6)}

    def test_global_partition(self):
        """Test random directions land in exactly one cell of C6x3."""
        matrix = get_matrix("C6x3")
        cones = enumerate_cones(matrix)
        simplices = decompose_all(cones)
        rng = np.random.default_rng(2)

        x = rng.standard_normal((20_000, 3))

        assert len(simplices) >= len(cones)
        assert np.all(_membership_counts(simplices, x) == 1)

    @pytest.mark.slow
    @pytest.mark.parametrize("name", registry_names())
    def test_global_partition_every_matrix(self, name):
        """Test 10^5 random directions each land in exactly one cell."""
        matrix = get_matrix(name)
        simplices = decompose_all(enumerate_cones(matrix))
        rng = np.random.default_rng(11)

        x = rng.standard_normal((100_000, matrix.N))

        counts = _membership_counts(simplices, x)
        assert counts.min() == 1
        assert counts.max() == 1

    def test_cells_stay_in_parent_cone(self):
        """Test each cell's rays belong to its parent cone's skeleton."""
        matrix = get_matrix("C7x3")
        cones = enumerate_cones(matrix)

        for simplex in decompose_all(cones):
            skeleton = cones[simplex.parent_cone].skeleton
            for ray in simplex.rays:
                assert np.min(np.linalg.norm(skeleton - ray, axis=1)) < 1e-12

    def test_solid_angle_conservation(self):
        """Test each cone's hit count equals the sum over its cells."""
        matrix = get_matrix("C8x3")
        cones = enumerate_cones(matrix)
        simplices = decompose_all(cones)
        rng = np.random.default_rng(4)
        x = rng.standard_normal((20_000, 3))

        for cone in cones:
            in_cone = int(np.count_nonzero(cone.contains(x, matrix)))
            cells = [s for s in simplices if s.parent_cone == cone.id]
            in_cells = sum(int(np.count_nonzero(s.contains(x))) for s in cells)
            assert in_cone == in_cells

    def test_threads_give_same_partition(self):
        """Test parallel decomposition numbers cells the same way."""
        cones = enumerate_cones(get_matrix("C9x3"))

        serial = decompose_all(cones, threads=1)
        parallel = decompose_all(cones, threads=4)

        assert [(s.id, s.parent_cone, s.ray_indices) for s in serial] == [
            (s.id, s.parent_cone, s.ray_indices) for s in parallel
        ]


class TestPartitionDump:
    """Tests for the plain-text partition listing."""

    def test_dump_layout(self):
        """Test one header per cone and one line per cell, ordered by pattern."""
        cones = enumerate_cones(get_matrix("C5x3"))
        simplices = decompose_all(cones)

        text = partition_dump(cones, simplices)

        lines = text.splitlines()
        headers = [line for line in lines if line.startswith("cone ")]
        patterns = [line.split()[1] for line in headers]
        assert len(headers) == len(cones)
        assert patterns == sorted(patterns)
        assert sum(1 for line in lines if line.startswith("  simplex ")) == len(simplices)

    def test_dump_is_stable(self):
        """Test repeated dumps are identical."""
        cones = enumerate_cones(get_matrix("C3x2"))

        first = partition_dump(cones, decompose_all(cones))
        second = partition_dump(cones, decompose_all(cones, threads=2))

        assert first == second
        assert first.startswith("cone +++ rays=2 simplices=1\n")
