"""
Cone Enumeration

Enumerates the full-dimensional cells of the central arrangement defined by a
DiscontinuityMatrix. Every cell is a pointed polyhedral cone described by its
sign pattern and its skeleton of extreme rays.

Extreme rays of a central arrangement are one-dimensional intersections of
N-1 hyperplanes, so the candidate set is found from null spaces of
(N-1)-row subsets of C, and each of the 2^M sign patterns keeps the candidates
that satisfy its inequalities.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from ..errors import DegenerateArrangementError
from .matrix import RANK_RCOND, DiscontinuityMatrix, numerical_rank

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
RAY_PARALLEL_TOL = 1e-9
ORACLE_MIN_SAMPLES = 10_000
ORACLE_CHUNK = 1 << 16

SignPattern = tuple[int, ...]


# =============================================================================
# CONE MODEL
# =============================================================================


@dataclass(frozen=True, eq=False)
class Cone:
    """
    One full-dimensional cell of the arrangement.

    `skeleton` holds the p >= N unit extreme rays as rows of a (p, N) array.
    """

    pattern: SignPattern
    skeleton: np.ndarray = field(repr=False)
    id: int = -1

    @property
    def p(self) -> int:
        return int(self.skeleton.shape[0])

    @property
    def N(self) -> int:
        return int(self.skeleton.shape[1])

    @property
    def is_simplicial(self) -> bool:
        return self.p == self.N

    def pattern_string(self) -> str:
        """Sign pattern as a string of '+' and '-'."""
        return pattern_string(self.pattern)

    def contains(self, points: np.ndarray, matrix: DiscontinuityMatrix) -> np.ndarray:
        """Boolean mask of points strictly inside this cone."""
        g = np.atleast_2d(points) @ matrix.array.T
        return np.all(g * np.asarray(self.pattern) > 0.0, axis=1)


def pattern_string(pattern: SignPattern) -> str:
    return "".join("+" if s > 0 else "-" for s in pattern)


def sign_patterns(points: np.ndarray, matrix: DiscontinuityMatrix) -> np.ndarray:
    """Sign vectors sign(Cx) of each row of `points`, with sign(0) = +1."""
    g = np.atleast_2d(points) @ matrix.array.T
    return np.where(g >= 0.0, 1, -1)


# =============================================================================
# RAY ENUMERATION
# =============================================================================


def _canonical(v: np.ndarray) -> np.ndarray:
    """Unit vector with its first significant component positive."""
    v = v / np.linalg.norm(v)
    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size and v[nonzero[0]] < 0.0:
        v = -v
    return v


def candidate_rays(matrix: DiscontinuityMatrix) -> np.ndarray:
    """
    All unit directions spanning the null space of some rank-(N-1) subset of
    N-1 rows of C, in both orientations, deduplicated under parallelism.

    Returns a (K, N) array; rays appear in subset order, +r before -r.
    """
    c = matrix.array
    n = matrix.N
    rays: list[np.ndarray] = []

    for subset in itertools.combinations(range(matrix.M), n - 1):
        kernel = null_space(c[list(subset)], rcond=RANK_RCOND)
        if kernel.shape[1] != 1:
            continue
        r = _canonical(kernel[:, 0])
        if any(abs(float(r @ q)) > 1.0 - RAY_PARALLEL_TOL for q in rays):
            continue
        rays.append(r)
        rays.append(-r)

    logger.debug("%d candidate rays for %s", len(rays), matrix.name or "matrix")
    if not rays:
        return np.empty((0, n))
    return np.vstack(rays)


# =============================================================================
# CONE ENUMERATION
# =============================================================================


def enumerate_cones(matrix: DiscontinuityMatrix) -> list[Cone]:
    """
    Enumerate the full-dimensional cones of the arrangement.

    A sign pattern s becomes a Cone when the candidate rays r with
    diag(s) C r >= -tol have rank N and their normalised mean satisfies every
    inequality strictly. Cones are returned in pattern order with ids 0..k-1.

    Raises:
        DegenerateArrangementError: if rank(C) < N or no pattern qualifies.
    """
    n = matrix.N
    if matrix.rank < n:
        raise DegenerateArrangementError(
            f"rank(C) = {matrix.rank} < N = {n}; cones would not be pointed (pad the matrix)"
        )

    c = matrix.array
    row_norms = np.linalg.norm(c, axis=1)
    tol = FEASIBILITY_TOL * row_norms[:, None]
    rays = candidate_rays(matrix)
    products = c @ rays.T  # (M, K)

    cones: list[Cone] = []
    for pattern in itertools.product((1, -1), repeat=matrix.M):
        s = np.asarray(pattern, dtype=float)[:, None]
        feasible = np.all(s * products >= -tol, axis=0)
        if np.count_nonzero(feasible) < n:
            continue
        skeleton = rays[feasible]
        if numerical_rank(skeleton) < n:
            continue
        witness = skeleton.sum(axis=0)
        witness /= np.linalg.norm(witness)
        if not np.all(s[:, 0] * (c @ witness) > tol[:, 0]):
            continue
        cones.append(Cone(pattern=pattern, skeleton=skeleton, id=len(cones)))

    if not cones:
        raise DegenerateArrangementError(
            f"no full-dimensional cones found for {matrix.name or 'matrix'}"
        )
    logger.info(
        "%s: %d cones from %d patterns (%d candidate rays)",
        matrix.name or "matrix", len(cones), 2**matrix.M, len(rays),
    )
    return cones


# =============================================================================
# SAMPLING ORACLE
# =============================================================================


def region_count_oracle(
    matrix: DiscontinuityMatrix,
    samples: int,
    seed: int,
) -> int:
    """
    Count distinct strict sign vectors of C x over standard-normal samples.

    Points landing exactly on a hyperplane are redrawn. The count is a lower
    bound on the number of cells that converges from below.
    """
    if samples < ORACLE_MIN_SAMPLES:
        raise ValueError(f"samples must be >= {ORACLE_MIN_SAMPLES}, got {samples}")

    rng = np.random.default_rng(seed)
    c = matrix.array
    seen: set[bytes] = set()
    remaining = samples

    while remaining > 0:
        size = min(remaining, ORACLE_CHUNK)
        x = rng.standard_normal((size, matrix.N))
        g = x @ c.T
        on_plane = np.any(g == 0.0, axis=1)
        while np.any(on_plane):
            x[on_plane] = rng.standard_normal((int(on_plane.sum()), matrix.N))
            g[on_plane] = x[on_plane] @ c.T
            on_plane = np.any(g == 0.0, axis=1)
        packed = np.packbits(g > 0.0, axis=1)
        seen.update(row.tobytes() for row in np.unique(packed, axis=0))
        remaining -= size

    return len(seen)


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "SignPattern",
    "Cone",
    "FEASIBILITY_TOL",
    "pattern_string",
    "sign_patterns",
    "candidate_rays",
    "enumerate_cones",
    "region_count_oracle",
]
