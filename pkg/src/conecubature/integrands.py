"""
Integrands

Products of one-dimensional factors evaluated on the hyperplane coordinates
g = C x, discontinuous wherever some g_i changes sign:

    F1(u) = 1 / (u - alpha + i beta sign(u))
    F2(u) = 1 / (u^2 - alpha + i beta sign(u))

The integrand is the real part of prod_i F(g_i) over the original (non-padding)
rows of C, with sign(0) = +1.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .arrangement import DiscontinuityMatrix

SignedFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


# =============================================================================
# SPECIFICATION
# =============================================================================


class IntegrandFamily(str, Enum):
    """Test-function families."""
    F1 = "F1"  # 1 / (u - alpha + i beta sign u)
    F2 = "F2"  # 1 / (u^2 - alpha + i beta sign u)


class IntegrandSpec(BaseModel):
    """Family, pole parameters and the discontinuity matrix."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: IntegrandFamily = IntegrandFamily.F1
    alpha: float = -0.2
    beta: float = 0.1
    matrix: DiscontinuityMatrix

    @field_validator("alpha", "beta")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @field_validator("beta")
    @classmethod
    def validate_beta(cls, v: float) -> float:
        """beta = 0 puts the poles on the real axis."""
        if v == 0.0:
            raise ValueError("beta must be nonzero")
        return v


# =============================================================================
# FACTORS
# =============================================================================


def sign(u: np.ndarray | float) -> np.ndarray:
    """+1 for u >= 0, -1 otherwise."""
    return np.where(np.asarray(u) >= 0.0, 1.0, -1.0)


def factor_values(
    u: np.ndarray | float,
    family: IntegrandFamily,
    alpha: float,
    beta: float,
) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = u if family == IntegrandFamily.F1 else u * u
    return 1.0 / (v - alpha + 1j * beta * sign(u))


def factor(u: float, spec: IntegrandSpec) -> complex:
    """Single complex factor F(u) for the family in `spec`."""
    return complex(factor_values(u, spec.family, spec.alpha, spec.beta))


# =============================================================================
# INTEGRAND CLASSES
# =============================================================================


@dataclass(eq=False)
class BaseIntegrand(ABC):
    """
    Vectorised integrand over R^N.

    Computes g = C x on the original rows and the sign vector once per batch
    and hands both to `evaluate`. Padding rows never reach `evaluate`.
    """

    matrix: DiscontinuityMatrix
    name: str = ""
    _rows: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rows = self.matrix.original_array

    @property
    def dimension(self) -> int:
        return self.matrix.N

    def __call__(self, x: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(x, dtype=float))
        g = points @ self._rows.T
        return np.asarray(self.evaluate(points, g, sign(g)), dtype=float)

    @abstractmethod
    def evaluate(self, x: np.ndarray, g: np.ndarray, signs: np.ndarray) -> np.ndarray:
        """Values for a (K, N) batch given g (K, M) and signs (K, M)."""


@dataclass(eq=False)
class GreenFunctionIntegrand(BaseIntegrand):
    """Re prod_i F(g_i) for the F1 or F2 family."""

    family: IntegrandFamily = IntegrandFamily.F1
    alpha: float = -0.2
    beta: float = 0.1

    def evaluate(self, x: np.ndarray, g: np.ndarray, signs: np.ndarray) -> np.ndarray:
        v = g if self.family == IntegrandFamily.F1 else g * g
        factors = 1.0 / (v - self.alpha + 1j * self.beta * signs)
        return np.prod(factors, axis=1).real


@dataclass(eq=False)
class CallableIntegrand(BaseIntegrand):
    """Wraps a user function fn(x, g, signs) -> values."""

    fn: SignedFunction | None = None

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.fn is None:
            raise ValueError("CallableIntegrand requires fn")

    def evaluate(self, x: np.ndarray, g: np.ndarray, signs: np.ndarray) -> np.ndarray:
        assert self.fn is not None
        return self.fn(x, g, signs)


def build_integrand(spec: IntegrandSpec) -> GreenFunctionIntegrand:
    return GreenFunctionIntegrand(
        matrix=spec.matrix,
        name=f"{spec.family.value}[{spec.matrix.name or 'C'}]",
        family=spec.family,
        alpha=spec.alpha,
        beta=spec.beta,
    )


def integrand(x: np.ndarray, spec: IntegrandSpec) -> float | np.ndarray:
    """Evaluate the integrand described by `spec` at one point (float) or a batch (array)."""
    values = build_integrand(spec)(x)
    return float(values[0]) if np.ndim(x) == 1 else values


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "SignedFunction",
    "IntegrandFamily",
    "IntegrandSpec",
    "sign",
    "factor_values",
    "factor",
    "BaseIntegrand",
    "GreenFunctionIntegrand",
    "CallableIntegrand",
    "build_integrand",
    "integrand",
]
