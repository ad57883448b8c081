"""Tests for the hypercube, orthant, cone and whole-space maps."""

import math

import numpy as np
import pytest

from conecubature.arrangement import get_matrix
from conecubature.cubature import Hyperrectangle, integrate_adaptive
from conecubature.errors import DomainError
from conecubature.mapping import (
    MappedIntegrand,
    ReciprocalOrthantMap,
    WholeSpaceIntegrand,
    hypercube_to_orthant,
    mapped_eval,
    simplex_point,
    whole_space_map,
)
from conecubature.orchestrator import build_partition
from conecubature.triangulation import SimplicialCone


def _identity_cell(n: int) -> SimplicialCone:
    return SimplicialCone(rays=np.eye(n), abs_det=1.0, parent_cone=0, ray_indices=tuple(range(n)))


def _fd_jacobian(fn, point: np.ndarray, step: float = 1e-5) -> float:
    """|det| of the central-difference Jacobian of a map (N,) -> (N,)."""
    n = point.shape[0]
    columns = []
    for i in range(n):
        shift = np.zeros(n)
        shift[i] = step
        columns.append((fn(point + shift) - fn(point - shift)) / (2 * step))
    return abs(float(np.linalg.det(np.column_stack(columns))))


# =============================================================================
# ORTHANT MAP TESTS
# =============================================================================


class TestHypercubeToOrthant:
    """Tests for hypercube_to_orthant."""

    def test_center(self):
        """Test u = 1/2 maps to lambda = 1 with jac 4^N."""
        lam, jac = hypercube_to_orthant(np.full(3, 0.5))

        assert np.allclose(lam, 1.0)
        assert jac == pytest.approx(64.0)

    def test_arithmetic(self):
        """Test u = (1/4, 1/2) gives lambda = (3, 1), jac = 64."""
        lam, jac = hypercube_to_orthant(np.array([0.25, 0.5]))

        assert np.allclose(lam, [3.0, 1.0])
        assert jac == pytest.approx(64.0)

    def test_near_one(self):
        """Test u -> 1 sends lambda to 0 with a finite weight."""
        lam, jac = hypercube_to_orthant(np.array([1 - 1e-12, 0.5]))

        assert lam[0] == pytest.approx(0.0, abs=1e-11)
        assert jac == pytest.approx(4.0)

    def test_batch(self):
        """Test (K, N) input returns per-point weights."""
        u = np.array([[0.5, 0.5], [0.25, 0.5]])

        lam, jac = hypercube_to_orthant(u)

        assert lam.shape == (2, 2)
        assert np.allclose(jac, [16.0, 64.0])

    @pytest.mark.parametrize("u", [[0.0, 0.5], [1.0, 0.5], [0.5, 1.2], [1e-310, 0.5]])
    def test_boundary_rejected(self, u):
        """Test boundary, exterior and underflowing points."""
        with pytest.raises(DomainError):
            hypercube_to_orthant(np.array(u))

    def test_jacobian_matches_finite_differences(self):
        """Test the analytic weight against central differences."""
        orthant = ReciprocalOrthantMap()
        rng = np.random.default_rng(0)

        for u in rng.uniform(0.05, 0.95, size=(100, 3)):
            _, jac = hypercube_to_orthant(u)
            numeric = _fd_jacobian(lambda p: orthant(p[None, :])[0][0], u)
            assert abs(numeric - jac) / jac <= 1e-6


class TestSimplexPoint:
    """Tests for simplex_point."""

    def test_origin(self):
        """Test lambda = 0 maps to the apex."""
        cell = SimplicialCone(rays=np.array([[1.0, 0.0], [0.6, 0.8]]), abs_det=0.8,
                              parent_cone=0, ray_indices=(0, 1))

        assert np.allclose(simplex_point(np.zeros(2), cell), 0.0)

    def test_unit_coefficients(self):
        """Test lambda = e_j picks out ray j."""
        rays = np.array([[1.0, 0.0], [0.6, 0.8]])
        cell = SimplicialCone(rays=rays, abs_det=0.8, parent_cone=0, ray_indices=(0, 1))

        assert np.allclose(simplex_point(np.array([0.0, 1.0]), cell), rays[1])

    def test_identity(self):
        """Test W = I maps (1, 1) to itself."""
        assert np.allclose(simplex_point(np.ones(2), _identity_cell(2)), [1.0, 1.0])

    def test_cone_containment(self):
        """Test mapped points satisfy their parent cone's inequalities."""
        partition = build_partition(get_matrix("C6x3"))
        c = partition.matrix.array
        rng = np.random.default_rng(5)

        for cell in partition.simplices:
            pattern = np.asarray(partition.cones[cell.parent_cone].pattern)
            lam = rng.exponential(size=(2_000, 3))
            x = simplex_point(lam, cell)
            g = (x @ c.T) * pattern
            assert np.all(g >= -1e-9 * np.linalg.norm(x, axis=1)[:, None])


# =============================================================================
# MAPPED INTEGRAND TESTS
# =============================================================================


class TestMappedIntegrand:
    """Tests for MappedIntegrand and mapped_eval."""

    def test_mapped_eval_weight(self):
        """Test f = 1 at the cube center gives |det W| 4^N."""
        cell = SimplicialCone(rays=np.array([[2.0, 0.0], [0.0, 1.5]]), abs_det=3.0,
                              parent_cone=0, ray_indices=(0, 1))

        value, finite = mapped_eval(np.full(2, 0.5), cell, lambda x: np.ones(len(x)))

        assert finite
        assert value == pytest.approx(48.0)

    def test_non_finite_flagged(self):
        """Test NaN values are reported through the flag."""
        value, finite = mapped_eval(np.full(2, 0.5), _identity_cell(2),
                                    lambda x: np.full(len(x), np.nan))

        assert not finite
        assert math.isnan(value)

    def test_fast_decay_near_zero(self):
        """Test decay beats the u^-2 weight near the singular face."""
        value, finite = mapped_eval(np.array([0.01, 0.5]), _identity_cell(2),
                                    lambda x: np.exp(-x.sum(axis=1)))

        # lambda = (99, 1), weight 10^4 * 4
        assert finite
        assert value == pytest.approx(math.exp(-100.0) * 4e4)

    def test_exponential_measure(self):
        """Test a unit-mass density on the orthant integrates to one."""
        f = MappedIntegrand(_identity_cell(2), lambda x: np.exp(-x.sum(axis=1)))

        result = integrate_adaptive(f, Hyperrectangle.unit(2), eps_rel=1e-10, budget=10**6)

        assert result.value == pytest.approx(1.0, abs=1e-8)

    def test_gaussian_quadrant(self):
        """Test the Gaussian over the positive quadrant is pi/2."""
        f = MappedIntegrand(_identity_cell(2), lambda x: np.exp(-0.5 * np.sum(x * x, axis=1)))

        result = integrate_adaptive(f, Hyperrectangle.unit(2), eps_rel=1e-8, budget=10**6)

        assert result.value == pytest.approx(math.pi / 2, rel=1e-6)

    def test_gaussian_over_partition(self):
        """Test the Gaussian summed over all cells of C3x2 is 2 pi."""
        partition = build_partition(get_matrix("C3x2"))
        gaussian = lambda x: np.exp(-0.5 * np.sum(x * x, axis=1))  # noqa: E731

        total = sum(
            integrate_adaptive(
                MappedIntegrand(cell, gaussian), Hyperrectangle.unit(2),
                eps_rel=1e-8, budget=10**6,
            ).value
            for cell in partition.simplices
        )

        assert total == pytest.approx(2 * math.pi, rel=1e-6)


# =============================================================================
# WHOLE-SPACE MAP TESTS
# =============================================================================


class TestWholeSpaceMap:
    """Tests for whole_space_map."""

    def test_origin(self):
        """Test t = 0."""
        x, jac = whole_space_map(np.zeros(2))

        assert np.allclose(x, 0.0)
        assert jac == pytest.approx(1.0)

    def test_arithmetic(self):
        """Test t = (1/2, 0) gives x = (2/3, 0), jac = 20/9."""
        x, jac = whole_space_map(np.array([0.5, 0.0]))

        assert np.allclose(x, [2 / 3, 0.0])
        assert jac == pytest.approx(20 / 9)

    def test_odd_symmetry(self):
        """Test x(-t) = -x(t) and jac(-t) = jac(t)."""
        t = np.array([[0.3, -0.7, 0.1]])

        x1, jac1 = whole_space_map(t)
        x2, jac2 = whole_space_map(-t)

        assert np.allclose(x2, -x1)
        assert np.allclose(jac2, jac1)

    @pytest.mark.parametrize("t", [[1.0, 0.0], [0.0, -1.0], [2.0, 0.0]])
    def test_boundary_rejected(self, t):
        """Test |t_i| >= 1."""
        with pytest.raises(DomainError):
            whole_space_map(np.array(t))

    def test_jacobian_matches_finite_differences(self):
        """Test the analytic weight against central differences."""
        rng = np.random.default_rng(1)

        for t in rng.uniform(-0.9, 0.9, size=(100, 3)):
            _, jac = whole_space_map(t)
            numeric = _fd_jacobian(lambda p: whole_space_map(p)[0], t)
            assert abs(numeric - jac) / jac <= 1e-6

    def test_gaussian_whole_plane(self):
        """Test the baseline transform integrates the Gaussian to 2 pi."""
        f = WholeSpaceIntegrand(lambda x: np.exp(-0.5 * np.sum(x * x, axis=1)))

        result = integrate_adaptive(f, Hyperrectangle.symmetric(2), eps_rel=1e-8, budget=10**6)

        assert result.value == pytest.approx(2 * math.pi, rel=1e-6)
