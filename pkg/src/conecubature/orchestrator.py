"""
Run Orchestrator

Drives a complete integration:

1. partition R^N into simplicial cones (padding C when it has too few rows);
2. pass 1: integrate every cell to a crude relative precision;
3. derive the absolute target eps_abs = f_rel * mu_max / sqrt(nu);
4. pass 2: re-integrate from scratch only the cells whose pass-1 error is at
   least eps_abs, to that absolute precision;
5. sum the cell values in id order and combine their errors.

The unpartitioned baseline integrates the whole-space map of the integrand
over (-1, 1)^N with a single adaptive call.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .arrangement import PADDING_SEED, Cone, DiscontinuityMatrix, enumerate_cones, pad_matrix
from .audit import AuditLogger
from .cubature import (
    CubatureResult,
    CubatureStatus,
    EvaluationCounter,
    Hyperrectangle,
    integrate_adaptive,
    rule_point_count,
)
from .errors import ConeCubatureError, GlobalBudgetExceeded
from .integrands import IntegrandSpec, build_integrand
from .mapping import MappedIntegrand, PointFunction, WholeSpaceIntegrand
from .triangulation import SimplicialCone, decompose_all, simplices_per_cone

logger = logging.getLogger(__name__)


# =============================================================================
# ENUMS
# =============================================================================


class RunMode(str, Enum):
    PARTITIONED = "partitioned"
    BASELINE = "baseline"


class ErrorFormula(str, Enum):
    """How per-cell errors combine into the run error."""
    AVERAGED = "averaged"        # sqrt(sum sigma^2 / nu)
    INDEPENDENT = "independent"  # sqrt(sum sigma^2)


class RunStatus(str, Enum):
    CONVERGED = "converged"  # every integration met its target
    DEGRADED = "degraded"    # some integration ran out of budget or resolution
    ABORTED = "aborted"      # global budget exceeded; partial result


# =============================================================================
# CONFIGURATION
# =============================================================================


class RunConfig(BaseModel):
    """Everything needed to reproduce a run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    spec: IntegrandSpec
    f_rel: float = Field(..., gt=0, lt=1)
    pass1_rel: float = Field(default=0.1, gt=0)
    budget_per_simplex: int = Field(default=10**8, gt=0)
    global_budget: int = Field(default=3 * 10**9, gt=0)
    threads: int = Field(default=1, ge=1)
    mode: RunMode = RunMode.PARTITIONED
    error_formula: ErrorFormula = ErrorFormula.AVERAGED
    padding_seed: int = PADDING_SEED

    @model_validator(mode="after")
    def validate_pass1(self) -> "RunConfig":
        if self.pass1_rel < self.f_rel:
            raise ValueError(
                f"pass1_rel ({self.pass1_rel}) must be >= f_rel ({self.f_rel})"
            )
        return self

    @model_validator(mode="after")
    def validate_budget(self) -> "RunConfig":
        points = rule_point_count(self.spec.matrix.N)
        budget, name = (
            (self.budget_per_simplex, "budget_per_simplex")
            if self.mode == RunMode.PARTITIONED
            else (self.global_budget, "global_budget")
        )
        if budget < points:
            raise ValueError(
                f"{name} ({budget}) is below one rule application ({points} points)"
            )
        return self


# =============================================================================
# REPORTS
# =============================================================================


class SimplexEstimate(BaseModel):
    """Per-cell values and errors from both passes."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    id: int
    parent_cone: int
    mu1: float
    sigma1: float = Field(..., ge=0)
    mu2: float
    sigma2: float = Field(..., ge=0)
    evals_pass1: int = Field(..., ge=0)
    evals_pass2: int = Field(default=0, ge=0)
    evals: int = Field(..., ge=0)
    refined: bool = False
    status1: CubatureStatus
    status2: CubatureStatus | None = None

    @model_validator(mode="after")
    def validate_passes(self) -> "SimplexEstimate":
        if self.evals != self.evals_pass1 + self.evals_pass2:
            raise ValueError("evals must equal evals_pass1 + evals_pass2")
        if not self.refined:
            if self.mu2 != self.mu1 or self.sigma2 != self.sigma1:
                raise ValueError("unrefined estimates must carry the pass-1 values")
            if self.evals_pass2 != 0:
                raise ValueError("unrefined estimates cannot have pass-2 evaluations")
        return self

    @property
    def final_status(self) -> CubatureStatus:
        return self.status2 if self.refined and self.status2 is not None else self.status1

    @classmethod
    def from_results(
        cls,
        simplex: SimplicialCone,
        first: CubatureResult,
        second: CubatureResult | None = None,
    ) -> "SimplexEstimate":
        final = second or first
        return cls(
            id=simplex.id,
            parent_cone=simplex.parent_cone,
            mu1=first.value,
            sigma1=first.error,
            mu2=final.value,
            sigma2=final.error,
            evals_pass1=first.evals,
            evals_pass2=second.evals if second else 0,
            evals=first.evals + (second.evals if second else 0),
            refined=second is not None,
            status1=first.status,
            status2=second.status if second else None,
        )


class RunReport(BaseModel):
    """Result of a partitioned or baseline run."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    mode: RunMode
    status: RunStatus
    integral: float
    sigma: float = Field(..., ge=0)
    n_evals: int = Field(..., ge=0)
    nu: int = Field(..., ge=0)
    n_cones: int = Field(default=0, ge=0)
    simplices_per_cone: list[int] = Field(default_factory=list)
    padded_rows: int = 0

    f_rel: float
    eps_rel_achieved: float | None = None
    eps_abs: float | None = None
    mu_max: float | None = None
    lower_bound: bool = False

    dimension: int
    n_rows: int
    matrix_name: str = ""
    family: str = ""

    estimates: list[SimplexEstimate] = Field(default_factory=list)
    wall_time_s: float = 0.0
    config: RunConfig
    error: str | None = None

    @property
    def count_label(self) -> str:
        """Table heading of the evaluation count for this mode."""
        return "N_p" if self.mode == RunMode.PARTITIONED else "N_H"

    def csv_row(self, reference: "RunReport | None" = None) -> dict[str, Any]:
        """
        One table row: N, M, evaluation count, achieved precision and, given
        the run in the other mode, the N_H/N_p ratio.
        """
        row: dict[str, Any] = {
            "N": self.dimension,
            "M": self.n_rows,
            "matrix": self.matrix_name,
            "family": self.family,
            "mode": self.mode.value,
            self.count_label: self.n_evals,
            "lower_bound": self.lower_bound,
            "f_rel": self.f_rel,
            "eps_rel_achieved": self.eps_rel_achieved,
            "I": self.integral,
            "sigma_I": self.sigma,
            "nu": self.nu,
            "status": self.status.value,
        }
        if reference is not None:
            row["N_H/N_p"] = evaluation_ratio(self, reference)
        return row


def evaluation_ratio(first: RunReport, second: RunReport) -> float:
    """N_H / N_p for one partitioned and one baseline report, in either order."""
    modes = {first.mode, second.mode}
    if modes != {RunMode.PARTITIONED, RunMode.BASELINE}:
        raise ValueError("ratio needs one partitioned and one baseline report")
    partitioned, baseline = (
        (first, second) if first.mode == RunMode.PARTITIONED else (second, first)
    )
    if partitioned.n_evals == 0:
        return math.inf
    return baseline.n_evals / partitioned.n_evals


# =============================================================================
# AGGREGATION
# =============================================================================


def aggregate(
    estimates: Sequence[tuple[float, float]],
    nu: int | None = None,
    formula: ErrorFormula = ErrorFormula.AVERAGED,
) -> tuple[float, float]:
    """
    Combine (mu, sigma) pairs in the given order.

    I = sum mu; sigma_I = sqrt(sum sigma^2 / nu) for the averaged formula,
    sqrt(sum sigma^2) for independent errors.
    """
    n = len(estimates) if nu is None else nu
    if n < 1:
        raise ValueError("nu must be at least 1")
    integral = math.fsum(mu for mu, _ in estimates)
    variance = math.fsum(sigma * sigma for _, sigma in estimates)
    if formula == ErrorFormula.AVERAGED:
        variance /= n
    return integral, math.sqrt(variance)


def _achieved(integral: float, sigma: float) -> float | None:
    return None if integral == 0.0 else sigma / abs(integral)


# =============================================================================
# PARTITION
# =============================================================================


@dataclass(frozen=True, eq=False)
class Partition:
    """Padded matrix, its cones and their simplicial cells."""

    matrix: DiscontinuityMatrix
    cones: list[Cone]
    simplices: list[SimplicialCone]
    padded_rows: int = 0

    @property
    def nu(self) -> int:
        return len(self.simplices)

    @property
    def n_cones(self) -> int:
        return len(self.cones)

    def simplices_per_cone(self) -> list[int]:
        counts = simplices_per_cone(self.simplices)
        return [counts.get(cone.id, 0) for cone in self.cones]

    def minimum_cost(self) -> int:
        """Evaluations if both passes touch every cell exactly once."""
        return 2 * self.nu * rule_point_count(self.matrix.N)


def build_partition(
    matrix: DiscontinuityMatrix,
    threads: int = 1,
    padding_seed: int = PADDING_SEED,
) -> Partition:
    """Pad C if needed, enumerate its cones and split them into simplicial cones."""
    padded = pad_matrix(matrix, seed=padding_seed)
    cones = enumerate_cones(padded)
    simplices = decompose_all(cones, threads=threads)
    return Partition(
        matrix=padded,
        cones=cones,
        simplices=simplices,
        padded_rows=padded.M - matrix.M,
    )


# =============================================================================
# PASSES
# =============================================================================


def _run_pass(
    simplices: Sequence[SimplicialCone],
    integrate: Callable[[SimplicialCone], CubatureResult],
    threads: int,
) -> tuple[dict[int, CubatureResult], GlobalBudgetExceeded | None]:
    """
    Integrate cells concurrently. Results are keyed by cell id; a global
    budget overrun stops the pass and is returned with whatever finished.
    """
    results: dict[int, CubatureResult] = {}
    overrun: GlobalBudgetExceeded | None = None

    if threads <= 1:
        for simplex in simplices:
            try:
                results[simplex.id] = integrate(simplex)
            except GlobalBudgetExceeded as e:
                overrun = e
                break
        return results, overrun

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures: list[tuple[int, Future[CubatureResult]]] = [
            (simplex.id, pool.submit(integrate, simplex)) for simplex in simplices
        ]
        for simplex_id, future in futures:
            if future.cancelled():
                continue
            try:
                results[simplex_id] = future.result()
            except GlobalBudgetExceeded as e:
                if overrun is None:
                    overrun = e
                    for _, pending in futures:
                        pending.cancel()
            except Exception:
                for _, pending in futures:
                    pending.cancel()
                raise
    return results, overrun


def _not_converged(results: dict[int, CubatureResult]) -> int:
    return sum(1 for r in results.values() if r.status != CubatureStatus.CONVERGED)


# =============================================================================
# RUNS
# =============================================================================


def run_partitioned(
    config: RunConfig,
    *,
    integrand: PointFunction | None = None,
    audit: AuditLogger | None = None,
    partition: Partition | None = None,
) -> RunReport:
    """
    Two-pass partitioned integration.

    `integrand` overrides the configured F1/F2 integrand (it must accept (K, N)
    batches); `partition` reuses a precomputed partition of config.spec.matrix.

    Raises:
        ValueError: if config.mode is not partitioned.
        ConeCubatureError: on degenerate partitions or persistent non-finite
            integrand values. A global budget overrun does not raise; it
            yields an aborted report.
    """
    if config.mode != RunMode.PARTITIONED:
        raise ValueError(f"run_partitioned needs mode=partitioned, got {config.mode.value}")

    start = time.perf_counter()
    spec = config.spec
    f = integrand or build_integrand(spec)
    if audit is not None:
        audit.log_run_start(config.model_dump(mode="json"))

    try:
        if partition is None:
            partition = build_partition(spec.matrix, config.threads, config.padding_seed)
        if audit is not None:
            audit.log_partition(
                partition.n_cones,
                partition.nu,
                partition.padded_rows,
                duration_ms=int((time.perf_counter() - start) * 1000),
            )
        logger.info(
            "partition: %d cones, %d simplices (%d padding rows)",
            partition.n_cones, partition.nu, partition.padded_rows,
        )

        counter = EvaluationCounter(config.global_budget)
        domain = Hyperrectangle.unit(spec.matrix.N)
        by_id = {s.id: s for s in partition.simplices}

        def integrate(simplex: SimplicialCone, eps_abs: float, eps_rel: float) -> CubatureResult:
            return integrate_adaptive(
                MappedIntegrand(simplex, f),
                domain,
                eps_abs=eps_abs,
                eps_rel=eps_rel,
                budget=config.budget_per_simplex,
                counter=counter,
            )

        pass_start = time.perf_counter()
        first, overrun = _run_pass(
            partition.simplices,
            lambda s: integrate(s, 0.0, config.pass1_rel),
            config.threads,
        )
        pass1_evals = sum(r.evals for r in first.values())
        logger.info("pass 1: %d simplices, %d evaluations", len(first), pass1_evals)
        if audit is not None:
            audit.log_pass(
                1, len(first), pass1_evals,
                duration_ms=int((time.perf_counter() - pass_start) * 1000),
                degraded=_not_converged(first),
            )

        second: dict[int, CubatureResult] = {}
        eps_abs: float | None = None
        mu_max: float | None = None

        if overrun is None:
            nu = partition.nu
            mu_max = max(abs(r.value) for r in first.values())
            scale = mu_max if mu_max > 0.0 else max(r.error for r in first.values())
            eps_abs = config.f_rel * scale / math.sqrt(nu)
            refine = [
                by_id[i] for i in sorted(first)
                if eps_abs > 0.0 and first[i].error >= eps_abs
            ]
            target = eps_abs

            pass_start = time.perf_counter()
            second, overrun = _run_pass(
                refine, lambda s: integrate(s, target, 0.0), config.threads
            )
            pass2_evals = sum(r.evals for r in second.values())
            logger.info(
                "pass 2: eps_abs=%.3e, %d of %d simplices refined, %d evaluations",
                eps_abs, len(second), nu, pass2_evals,
            )
            if audit is not None:
                audit.log_pass(
                    2, len(second), pass2_evals, eps_abs=eps_abs,
                    duration_ms=int((time.perf_counter() - pass_start) * 1000),
                    degraded=_not_converged(second),
                )

        estimates = [
            SimplexEstimate.from_results(by_id[i], first[i], second.get(i))
            for i in sorted(first)
        ]
    except ConeCubatureError as e:
        if audit is not None:
            audit.log_run_failed(str(e), stage="partitioned")
        raise

    if estimates:
        integral, sigma = aggregate(
            [(e.mu2, e.sigma2) for e in estimates], partition.nu, config.error_formula
        )
    else:
        integral, sigma = 0.0, math.inf
    # every integrand call, including integrations cut off by an overrun
    n_evals = counter.total

    if overrun is not None:
        status = RunStatus.ABORTED
        if audit is not None:
            audit.log_budget_exhausted("global", overrun.evals, overrun.budget)
    elif any(e.final_status != CubatureStatus.CONVERGED for e in estimates):
        status = RunStatus.DEGRADED
    else:
        status = RunStatus.CONVERGED

    report = RunReport(
        mode=RunMode.PARTITIONED,
        status=status,
        integral=integral,
        sigma=sigma,
        n_evals=n_evals,
        nu=partition.nu,
        n_cones=partition.n_cones,
        simplices_per_cone=partition.simplices_per_cone(),
        padded_rows=partition.padded_rows,
        f_rel=config.f_rel,
        eps_rel_achieved=_achieved(integral, sigma),
        eps_abs=eps_abs,
        mu_max=mu_max,
        lower_bound=status == RunStatus.ABORTED,
        dimension=spec.matrix.N,
        n_rows=spec.matrix.n_original,
        matrix_name=spec.matrix.name,
        family=spec.family.value,
        estimates=estimates,
        wall_time_s=time.perf_counter() - start,
        config=config,
        error=str(overrun) if overrun is not None else None,
    )
    if audit is not None:
        audit.log_run_complete(
            status.value, integral, sigma, n_evals, int(report.wall_time_s * 1000)
        )
    return report


def run_baseline(
    config: RunConfig,
    *,
    integrand: PointFunction | None = None,
    audit: AuditLogger | None = None,
) -> RunReport:
    """
    Single adaptive integration of the whole-space map over (-1, 1)^N to
    relative precision f_rel, capped at global_budget evaluations.

    Raises:
        ValueError: if config.mode is not baseline.
    """
    if config.mode != RunMode.BASELINE:
        raise ValueError(f"run_baseline needs mode=baseline, got {config.mode.value}")

    start = time.perf_counter()
    spec = config.spec
    f = integrand or build_integrand(spec)
    if audit is not None:
        audit.log_run_start(config.model_dump(mode="json"))

    try:
        result = integrate_adaptive(
            WholeSpaceIntegrand(f),
            Hyperrectangle.symmetric(spec.matrix.N),
            eps_rel=config.f_rel,
            budget=config.global_budget,
        )
    except ConeCubatureError as e:
        if audit is not None:
            audit.log_run_failed(str(e), stage="baseline")
        raise

    exhausted = result.status == CubatureStatus.BUDGET_EXHAUSTED
    status = RunStatus.CONVERGED if result.converged else RunStatus.DEGRADED
    logger.info(
        "baseline: %s after %d evaluations (%d regions)",
        result.status.value, result.evals, result.regions,
    )
    if audit is not None:
        audit.log_pass(1, 1, result.evals, degraded=int(not result.converged))
        if exhausted:
            audit.log_budget_exhausted("baseline", result.evals, config.global_budget)

    report = RunReport(
        mode=RunMode.BASELINE,
        status=status,
        integral=result.value,
        sigma=result.error,
        n_evals=result.evals,
        nu=1,
        n_cones=1,
        f_rel=config.f_rel,
        eps_rel_achieved=_achieved(result.value, result.error),
        lower_bound=exhausted,
        dimension=spec.matrix.N,
        n_rows=spec.matrix.n_original,
        matrix_name=spec.matrix.name,
        family=spec.family.value,
        wall_time_s=time.perf_counter() - start,
        config=config,
    )
    if audit is not None:
        audit.log_run_complete(
            status.value, result.value, result.error, result.evals,
            int(report.wall_time_s * 1000),
        )
    return report


def run(config: RunConfig, **kwargs: Any) -> RunReport:
    """Dispatch on config.mode."""
    if config.mode == RunMode.PARTITIONED:
        return run_partitioned(config, **kwargs)
    return run_baseline(config, **kwargs)


# =============================================================================
# REPORT OUTPUT
# =============================================================================


def write_reports(
    report: RunReport,
    out_dir: str | Path,
    stem: str = "report",
    audit: AuditLogger | None = None,
) -> tuple[Path, Path]:
    """
    Write `<stem>.json` (full report) and `<stem>.csv` (one table row). For
    partitioned runs the per-cell estimates also go to `<stem>_simplices.csv`.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    json_path = out / f"{stem}.json"
    payload = report.model_dump_json(indent=2)
    json_path.write_text(payload)

    csv_path = out / f"{stem}.csv"
    pd.DataFrame([report.csv_row()]).to_csv(csv_path, index=False)

    if report.estimates:
        frame = pd.DataFrame([e.model_dump(mode="json") for e in report.estimates])
        frame.to_csv(out / f"{stem}_simplices.csv", index=False)

    if audit is not None:
        audit.log_report_written(json_path, payload)
        audit.log_report_written(csv_path, csv_path.read_text())
    return json_path, csv_path


def load_report(path: str | Path) -> RunReport:
    return RunReport.model_validate_json(Path(path).read_text())


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "RunMode",
    "ErrorFormula",
    "RunStatus",
    "RunConfig",
    "SimplexEstimate",
    "RunReport",
    "evaluation_ratio",
    "aggregate",
    "Partition",
    "build_partition",
    "run_partitioned",
    "run_baseline",
    "run",
    "write_reports",
    "load_report",
]
