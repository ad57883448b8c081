"""
Genz-Malik Rule

Fully symmetric degree-7 cubature rule over hyperrectangles with an embedded
degree-5 rule sharing the same nodes. The difference of the two estimates is
the local error, and a fourth divided difference along each axis picks the
dimension to bisect.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from ..errors import RegionEvaluationError

VectorIntegrand = Callable[[np.ndarray], np.ndarray]

LAMBDA2 = math.sqrt(9.0 / 70.0)
LAMBDA3 = math.sqrt(9.0 / 10.0)
LAMBDA4 = math.sqrt(9.0 / 10.0)
LAMBDA5 = math.sqrt(9.0 / 19.0)

# (LAMBDA2 / LAMBDA3)^2, cancels the second-order term in the divided difference
DIFF_RATIO = (LAMBDA2 / LAMBDA3) ** 2
SPLIT_TIE_TOL = 1e-10


def rule_point_count(dim: int) -> int:
    """2^N + 2N^2 + 2N + 1."""
    return 2**dim + 2 * dim * dim + 2 * dim + 1


# =============================================================================
# REGIONS
# =============================================================================


@dataclass(frozen=True, eq=False)
class Hyperrectangle:
    """Axis-aligned box given by its center and positive halfwidths."""

    center: np.ndarray
    halfwidth: np.ndarray

    def __post_init__(self) -> None:
        center = np.asarray(self.center, dtype=float)
        halfwidth = np.asarray(self.halfwidth, dtype=float)
        if center.shape != halfwidth.shape or center.ndim != 1:
            raise ValueError("center and halfwidth must be 1-D arrays of equal length")
        if np.any(halfwidth <= 0.0):
            raise ValueError("halfwidths must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "halfwidth", halfwidth)

    @classmethod
    def from_bounds(cls, lower: np.ndarray, upper: np.ndarray) -> "Hyperrectangle":
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        return cls(center=(lo + hi) / 2.0, halfwidth=(hi - lo) / 2.0)

    @classmethod
    def unit(cls, dim: int) -> "Hyperrectangle":
        """(0, 1)^N."""
        return cls(center=np.full(dim, 0.5), halfwidth=np.full(dim, 0.5))

    @classmethod
    def symmetric(cls, dim: int) -> "Hyperrectangle":
        """(-1, 1)^N."""
        return cls(center=np.zeros(dim), halfwidth=np.ones(dim))

    @property
    def dim(self) -> int:
        return int(self.center.shape[0])

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.halfwidth))

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.halfwidth

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.halfwidth

    def bisect(self, axis: int) -> tuple["Hyperrectangle", "Hyperrectangle"]:
        """Halve along one axis; lower half first."""
        halfwidth = self.halfwidth.copy()
        halfwidth[axis] /= 2.0
        shift = np.zeros_like(self.center)
        shift[axis] = halfwidth[axis]
        return (
            Hyperrectangle(center=self.center - shift, halfwidth=halfwidth),
            Hyperrectangle(center=self.center + shift, halfwidth=halfwidth.copy()),
        )


# =============================================================================
# RULE
# =============================================================================


@dataclass(frozen=True, eq=False)
class GenzMalikRule:
    """
    Nodes on [-1, 1]^N with degree-7 and degree-5 weights normalised to sum
    to one, so an estimate is volume * (weights . values).

    Node layout: center, then +-LAMBDA2 e_i pairs, +-LAMBDA3 e_i pairs,
    (+-LAMBDA4, +-LAMBDA4) on each coordinate pair, and the 2^N corners at
    +-LAMBDA5.
    """

    dim: int
    nodes: np.ndarray = field(repr=False)
    weights7: np.ndarray = field(repr=False)
    weights5: np.ndarray = field(repr=False)

    @property
    def points(self) -> int:
        return int(self.nodes.shape[0])

    def nodes_in(self, region: Hyperrectangle) -> np.ndarray:
        """Rule nodes mapped into the region, shape (P, N)."""
        return region.center + self.nodes * region.halfwidth

    def estimates(self, values: np.ndarray, region: Hyperrectangle) -> tuple[float, float]:
        """Degree-7 and degree-5 estimates from the node values."""
        vol = region.volume
        return vol * float(self.weights7 @ values), vol * float(self.weights5 @ values)

    def split_axis(self, values: np.ndarray, region: Hyperrectangle) -> int:
        """
        Axis with the largest fourth divided difference. Near-ties go to the
        widest axis, then to the lowest index.
        """
        n = self.dim
        f0 = values[0]
        lam2 = values[1 : 1 + 2 * n].reshape(n, 2)
        lam3 = values[1 + 2 * n : 1 + 4 * n].reshape(n, 2)
        diffs = np.abs(
            (lam2[:, 0] + lam2[:, 1] - 2.0 * f0) - DIFF_RATIO * (lam3[:, 0] + lam3[:, 1] - 2.0 * f0)
        )
        if not np.all(np.isfinite(diffs)):
            return widest_axis(region)
        top = float(diffs.max())
        tied = np.flatnonzero(diffs >= top - SPLIT_TIE_TOL * max(top, abs(float(f0))))
        widths = region.halfwidth[tied]
        return int(tied[int(np.argmax(widths))])


def widest_axis(region: Hyperrectangle) -> int:
    return int(np.argmax(region.halfwidth))


@lru_cache(maxsize=None)
def rule_for(dim: int) -> GenzMalikRule:
    """Build (and cache) the rule for dimension N >= 2."""
    if dim < 2:
        raise ValueError(f"Genz-Malik rule needs N >= 2, got {dim}")
    n = dim
    eye = np.eye(n)

    groups: list[tuple[np.ndarray, float, float]] = []
    groups.append((np.zeros((1, n)), (12824 - 9120 * n + 400 * n * n) / 19683, (729 - 950 * n + 50 * n * n) / 729))

    axis2 = np.vstack([s * LAMBDA2 * eye[i] for i in range(n) for s in (1.0, -1.0)])
    groups.append((axis2, 980 / 6561, 245 / 486))

    axis3 = np.vstack([s * LAMBDA3 * eye[i] for i in range(n) for s in (1.0, -1.0)])
    groups.append((axis3, (1820 - 400 * n) / 19683, (265 - 100 * n) / 1458))

    pairs = [
        LAMBDA4 * (si * eye[i] + sj * eye[j])
        for i, j in itertools.combinations(range(n), 2)
        for si, sj in itertools.product((1.0, -1.0), repeat=2)
    ]
    groups.append((np.vstack(pairs), 200 / 19683, 25 / 729))

    corners = LAMBDA5 * np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    groups.append((corners, 6859 / 19683 / 2**n, 0.0))

    nodes = np.vstack([g[0] for g in groups])
    weights7 = np.concatenate([np.full(len(g[0]), g[1]) for g in groups])
    weights5 = np.concatenate([np.full(len(g[0]), g[2]) for g in groups])
    return GenzMalikRule(dim=n, nodes=nodes, weights7=weights7, weights5=weights5)


# =============================================================================
# SINGLE APPLICATION
# =============================================================================


def genz_malik_apply(
    f: VectorIntegrand,
    region: Hyperrectangle,
) -> tuple[float, float, int, int]:
    """
    Apply the rule once.

    Returns (value7, value5, split_dim, evals) where evals is the rule's point
    count.

    Raises:
        RegionEvaluationError: if f is non-finite at any node.
    """
    rule = rule_for(region.dim)
    values = np.asarray(f(rule.nodes_in(region)), dtype=float)
    if not np.all(np.isfinite(values)):
        raise RegionEvaluationError(
            f"non-finite integrand value in region centered at {region.center.tolist()}"
        )
    value7, value5 = rule.estimates(values, region)
    return value7, value5, rule.split_axis(values, region), rule.points


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "VectorIntegrand",
    "LAMBDA2",
    "LAMBDA3",
    "LAMBDA4",
    "LAMBDA5",
    "rule_point_count",
    "Hyperrectangle",
    "GenzMalikRule",
    "widest_axis",
    "rule_for",
    "genz_malik_apply",
]
