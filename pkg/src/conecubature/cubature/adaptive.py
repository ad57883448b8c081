"""
Adaptive Cubature Driver

Globally adaptive subdivision over a hyperrectangle: the region with the
largest error estimate is bisected along its split axis until the summed
error meets the requested tolerance or the evaluation budget runs out.
"""

from __future__ import annotations

import heapq
import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import GlobalBudgetExceeded, RegionEvaluationError
from .genz_malik import GenzMalikRule, Hyperrectangle, VectorIntegrand, rule_for, widest_axis

logger = logging.getLogger(__name__)

MIN_HALFWIDTH = 1e-14


# =============================================================================
# RESULT TYPES
# =============================================================================


class CubatureStatus(str, Enum):
    """How an adaptive integration ended."""
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"
    REGION_TOO_SMALL = "region_too_small"


class CubatureResult(BaseModel):
    """Summed value and error over all leaf regions."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    value: float
    error: float = Field(..., ge=0)
    evals: int = Field(..., gt=0)
    status: CubatureStatus
    regions: int = Field(default=1, ge=1)

    @property
    def converged(self) -> bool:
        return self.status == CubatureStatus.CONVERGED


@dataclass(frozen=True, eq=False)
class AdaptiveRegion:
    """
    A leaf of the subdivision tree with its rule estimates.

    A suspect region saw non-finite integrand values: it carries value 0 and
    infinite error so it is split next.
    """

    box: Hyperrectangle
    value: float
    error: float
    split_dim: int
    evals: int
    index: int
    suspect: bool = False

    @property
    def center(self) -> np.ndarray:
        return self.box.center

    @property
    def halfwidth(self) -> np.ndarray:
        return self.box.halfwidth


# =============================================================================
# GLOBAL COUNTER
# =============================================================================


class EvaluationCounter:
    """
    Thread-safe run-wide evaluation counter with a hard cap.

    `reserve` is called before integrand calls are made, so the total never
    passes the cap.
    """

    def __init__(self, budget: int):
        if budget <= 0:
            raise ValueError("global budget must be positive")
        self.budget = budget
        self._total = 0
        self._lock = threading.Lock()

    @property
    def total(self) -> int:
        with self._lock:
            return self._total

    def reserve(self, n: int) -> None:
        with self._lock:
            if self._total + n > self.budget:
                raise GlobalBudgetExceeded(self._total + n, self.budget)
            self._total += n


# =============================================================================
# DRIVER
# =============================================================================


def _tolerance(eps_abs: float, eps_rel: float, value: float) -> float:
    return max(eps_abs, eps_rel * abs(value))


class _Subdivision:
    """Priority queue of leaf regions plus running totals."""

    def __init__(self, f: VectorIntegrand, rule: GenzMalikRule, counter: EvaluationCounter | None):
        self.f = f
        self.rule = rule
        self.counter = counter
        self.heap: list[tuple[float, int, AdaptiveRegion]] = []
        self.created = 0
        self.evals = 0
        self.value = 0.0
        self.error = 0.0
        self.suspects = 0

    def evaluate(self, boxes: list[Hyperrectangle], parent_suspect: bool = False) -> None:
        """Apply the rule to each box with a single vectorised integrand call."""
        p = self.rule.points
        n_evals = p * len(boxes)
        if self.counter is not None:
            self.counter.reserve(n_evals)
        nodes = np.vstack([self.rule.nodes_in(box) for box in boxes])
        values = np.asarray(self.f(nodes), dtype=float).reshape(len(boxes), p)
        self.evals += n_evals

        for box, vals in zip(boxes, values):
            if np.all(np.isfinite(vals)):
                value7, value5 = self.rule.estimates(vals, box)
                region = AdaptiveRegion(
                    box=box,
                    value=value7,
                    error=abs(value7 - value5),
                    split_dim=self.rule.split_axis(vals, box),
                    evals=p,
                    index=self.created,
                )
                self.value += region.value
                self.error += region.error
            else:
                if parent_suspect:
                    raise RegionEvaluationError(
                        f"non-finite integrand values persist after subdivision near "
                        f"{box.center.tolist()}"
                    )
                logger.debug("non-finite values in region %d; marking suspect", self.created)
                region = AdaptiveRegion(
                    box=box,
                    value=0.0,
                    error=math.inf,
                    split_dim=widest_axis(box),
                    evals=p,
                    index=self.created,
                    suspect=True,
                )
                self.suspects += 1
            self.created += 1
            heapq.heappush(self.heap, (-region.error, region.index, region))

    def pop(self) -> AdaptiveRegion:
        region = heapq.heappop(self.heap)[2]
        if region.suspect:
            self.suspects -= 1
        else:
            self.value -= region.value
            self.error -= region.error
        return region

    def push_back(self, region: AdaptiveRegion) -> None:
        if region.suspect:
            self.suspects += 1
        else:
            self.value += region.value
            self.error += region.error
        heapq.heappush(self.heap, (-region.error, region.index, region))

    def resum(self) -> tuple[float, float]:
        """Exact totals over the leaves; also resets the running sums."""
        regions = [entry[2] for entry in self.heap]
        self.value = math.fsum(r.value for r in regions if not r.suspect)
        self.error = math.fsum(r.error for r in regions if not r.suspect)
        return self.value, self.error

    def converged(self, eps_abs: float, eps_rel: float) -> bool:
        if self.suspects:
            return False
        if self.error > _tolerance(eps_abs, eps_rel, self.value):
            return False
        value, error = self.resum()
        return error <= _tolerance(eps_abs, eps_rel, value)

    def result(self, status: CubatureStatus) -> CubatureResult:
        regions = [entry[2] for entry in sorted(self.heap, key=lambda e: e[1])]
        value = math.fsum(r.value for r in regions)
        error = math.inf if self.suspects else math.fsum(r.error for r in regions)
        return CubatureResult(
            value=value, error=error, evals=self.evals, status=status, regions=len(regions)
        )


def integrate_adaptive(
    f: VectorIntegrand,
    domain: Hyperrectangle,
    eps_abs: float = 0.0,
    eps_rel: float = 0.0,
    budget: int = 10**8,
    counter: EvaluationCounter | None = None,
) -> CubatureResult:
    """
    Integrate a vectorised integrand over a hyperrectangle.

    `f` maps a (K, N) array of points to K values. Terminates when
    sum(error) <= max(eps_abs, eps_rel * |sum(value)|), when the next
    bisection would exceed `budget` evaluations, or when the worst region
    can no longer be halved. `evals` counts every integrand call exactly.

    Raises:
        RegionEvaluationError: if non-finite values survive one extra split.
        GlobalBudgetExceeded: if the shared `counter` runs out.
    """
    if eps_abs < 0 or eps_rel < 0:
        raise ValueError("tolerances must be non-negative")
    if eps_abs == 0 and eps_rel == 0:
        raise ValueError("at least one of eps_abs and eps_rel must be positive")

    rule = rule_for(domain.dim)
    if budget < rule.points:
        raise ValueError(
            f"budget {budget} is below one rule application ({rule.points} points)"
        )

    state = _Subdivision(f, rule, counter)
    state.evaluate([domain])

    while True:
        if state.converged(eps_abs, eps_rel):
            status = CubatureStatus.CONVERGED
            break
        if state.evals + 2 * rule.points > budget:
            status = CubatureStatus.BUDGET_EXHAUSTED
            break
        region = state.pop()
        if region.halfwidth[region.split_dim] < MIN_HALFWIDTH:
            state.push_back(region)
            status = CubatureStatus.REGION_TOO_SMALL
            break
        state.evaluate(list(region.box.bisect(region.split_dim)), parent_suspect=region.suspect)

    result = state.result(status)
    logger.debug(
        "adaptive cubature %s: value=%.6e error=%.3e evals=%d regions=%d",
        status.value, result.value, result.error, result.evals, result.regions,
    )
    return result


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "MIN_HALFWIDTH",
    "CubatureStatus",
    "CubatureResult",
    "AdaptiveRegion",
    "EvaluationCounter",
    "integrate_adaptive",
]
