"""
Error Types

Exception hierarchy shared by the partitioning, mapping and cubature layers.
Budget exhaustion of a single integration is reported through a status field,
not raised.
"""

from __future__ import annotations


class ConeCubatureError(Exception):
    """Base class for all library errors."""


class MatrixFormatError(ConeCubatureError, ValueError):
    """Malformed matrix text input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ConfigFileError(ConeCubatureError, ValueError):
    """Unreadable or inconsistent run configuration file."""


class DegenerateArrangementError(ConeCubatureError):
    """The hyperplanes do not cut space into pointed full-dimensional cones."""


class DegenerateConeError(ConeCubatureError):
    """A cone has no usable axis or its base does not span N-1 dimensions."""


class DegenerateSimplexError(ConeCubatureError):
    """A simplicial cone has a (numerically) vanishing generator determinant."""


class DomainError(ConeCubatureError, ValueError):
    """A mapping was asked to evaluate on or outside its open domain."""


class RegionEvaluationError(ConeCubatureError):
    """The integrand returned non-finite values inside a cubature region."""


class GlobalBudgetExceeded(ConeCubatureError):
    """The run-wide integrand evaluation counter passed its cap."""

    def __init__(self, evals: int, budget: int):
        self.evals = evals
        self.budget = budget
        super().__init__(f"global evaluation budget exceeded: {evals} > {budget}")


__all__ = [
    "ConeCubatureError",
    "MatrixFormatError",
    "ConfigFileError",
    "DegenerateArrangementError",
    "DegenerateConeError",
    "DegenerateSimplexError",
    "DomainError",
    "RegionEvaluationError",
    "GlobalBudgetExceeded",
]
