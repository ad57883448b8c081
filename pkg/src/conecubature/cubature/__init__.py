"""Embedded Genz-Malik cubature and the globally adaptive driver."""

from .adaptive import (
    MIN_HALFWIDTH,
    AdaptiveRegion,
    CubatureResult,
    CubatureStatus,
    EvaluationCounter,
    integrate_adaptive,
)
from .genz_malik import (
    LAMBDA2,
    LAMBDA3,
    LAMBDA4,
    LAMBDA5,
    GenzMalikRule,
    Hyperrectangle,
    VectorIntegrand,
    genz_malik_apply,
    rule_for,
    rule_point_count,
    widest_axis,
)

__all__ = [
    # Rule
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
    # Driver
    "MIN_HALFWIDTH",
    "CubatureStatus",
    "CubatureResult",
    "AdaptiveRegion",
    "EvaluationCounter",
    "integrate_adaptive",
]
