"""
Domain Mappings

Variable changes that turn integrals over unbounded domains into integrals
over hypercubes:

- the unit hypercube onto the positive orthant, lambda_i = 1/u_i - 1;
- the orthant onto a simplicial cone, x = W lambda;
- the whole-space baseline map x_i = t_i / (1 - t_i^2) on (-1, 1)^N.

All maps accept a single point of shape (N,) or a batch of shape (K, N).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .triangulation import SimplicialCone

PointFunction = Callable[[np.ndarray], np.ndarray]

# 1/u overflows double precision below this
UNDERFLOW_GUARD = 1e-300


# =============================================================================
# ORTHANT MAPS
# =============================================================================


class OrthantMap(ABC):
    """Bijection from (0, 1)^N onto (0, inf)^N with its Jacobian."""

    name: str = "orthant"

    @abstractmethod
    def __call__(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map a (K, N) batch; returns (lambda, jac) with jac of shape (K,)."""


class ReciprocalOrthantMap(OrthantMap):
    """lambda_i = 1/u_i - 1 with |d lambda_i / d u_i| = u_i^-2."""

    name = "reciprocal"

    def __call__(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if np.any(u <= UNDERFLOW_GUARD) or np.any(u >= 1.0):
            raise DomainError("u must lie strictly inside (0, 1)^N")
        lam = 1.0 / u - 1.0
        jac = np.prod(u ** -2.0, axis=1)
        return lam, jac


DEFAULT_ORTHANT_MAP = ReciprocalOrthantMap()


def _as_batch(points: np.ndarray) -> tuple[np.ndarray, bool]:
    a = np.asarray(points, dtype=float)
    return (a[None, :], True) if a.ndim == 1 else (a, False)


def hypercube_to_orthant(
    u: np.ndarray,
    orthant_map: OrthantMap = DEFAULT_ORTHANT_MAP,
) -> tuple[np.ndarray, np.ndarray | float]:
    """
    Map u in (0, 1)^N to lambda in (0, inf)^N.

    Raises:
        DomainError: if any u_i is on or outside the boundary.
    """
    batch, single = _as_batch(u)
    lam, jac = orthant_map(batch)
    if single:
        return lam[0], float(jac[0])
    return lam, jac


def simplex_point(lam: np.ndarray, simplex: SimplicialCone) -> np.ndarray:
    """x = W lambda = sum_i lambda_i w_i."""
    return np.asarray(lam, dtype=float) @ simplex.rays


# =============================================================================
# MAPPED INTEGRANDS
# =============================================================================


@dataclass(frozen=True)
class MappedIntegrand:
    """
    f(W lambda(u)) |det W| J(u) as a vectorised function on (0, 1)^N.

    The cubature driver calls this with (K, N) node batches; the rule never
    samples the boundary.
    """

    simplex: SimplicialCone
    base: PointFunction
    orthant_map: OrthantMap = field(default=DEFAULT_ORTHANT_MAP)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        batch, _ = _as_batch(u)
        lam, jac = self.orthant_map(batch)
        x = simplex_point(lam, self.simplex)
        return np.asarray(self.base(x), dtype=float) * (self.simplex.abs_det * jac)


def mapped_eval(
    u: np.ndarray,
    simplex: SimplicialCone,
    f: PointFunction,
) -> tuple[float, bool]:
    """Single-point evaluation of the mapped integrand with a finiteness flag."""
    value = float(MappedIntegrand(simplex, f)(np.asarray(u, dtype=float))[0])
    return value, bool(np.isfinite(value))


# =============================================================================
# WHOLE-SPACE MAP
# =============================================================================


def whole_space_map(t: np.ndarray) -> tuple[np.ndarray, np.ndarray | float]:
    """
    x_i = t_i / (1 - t_i^2), jac = prod (1 + t_i^2) / (1 - t_i^2)^2.

    Raises:
        DomainError: if any |t_i| >= 1.
    """
    batch, single = _as_batch(t)
    if np.any(np.abs(batch) >= 1.0):
        raise DomainError("t must lie strictly inside (-1, 1)^N")
    denom = 1.0 - batch * batch
    x = batch / denom
    jac = np.prod((1.0 + batch * batch) / (denom * denom), axis=1)
    if single:
        return x[0], float(jac[0])
    return x, jac


@dataclass(frozen=True)
class WholeSpaceIntegrand:
    """f(x(t)) J(t) on (-1, 1)^N, used by the unpartitioned baseline."""

    base: PointFunction

    def __call__(self, t: np.ndarray) -> np.ndarray:
        x, jac = whole_space_map(t)
        return np.asarray(self.base(np.atleast_2d(x)), dtype=float) * jac


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "PointFunction",
    "UNDERFLOW_GUARD",
    "OrthantMap",
    "ReciprocalOrthantMap",
    "DEFAULT_ORTHANT_MAP",
    "hypercube_to_orthant",
    "simplex_point",
    "MappedIntegrand",
    "mapped_eval",
    "whole_space_map",
    "WholeSpaceIntegrand",
]
