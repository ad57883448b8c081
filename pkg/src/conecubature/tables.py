"""
Comparison Tables

Runs the partitioned and baseline modes side by side over the registry
matrices and tabulates evaluation counts N_p and N_H, the achieved relative
precision of each, and the ratio N_H/N_p. Baseline runs that exhaust their
budget are shown as lower bounds ("> budget").
"""

from __future__ import annotations

import logging
from enum import Enum

import pandas as pd

from .arrangement import get_matrix, registry_names
from .audit import AuditLogger
from .integrands import IntegrandFamily, IntegrandSpec
from .orchestrator import RunConfig, RunMode, run_baseline, run_partitioned

logger = logging.getLogger(__name__)


class TableSuite(str, Enum):
    """Desk-scale versions of the F1 and F2 comparisons."""
    F1_DESK = "f1_desk"
    F2_DESK = "f2_desk"


SUITE_FAMILIES = {
    TableSuite.F1_DESK: IntegrandFamily.F1,
    TableSuite.F2_DESK: IntegrandFamily.F2,
}

TABLE_COLUMNS = ["N", "M", "N_p", "eps_rel_p", "N_H", "eps_rel_h", "N_H/N_p"]


def suite_matrices(max_dim: int) -> list[str]:
    """Registry names with N <= max_dim, ordered by (N, M)."""
    return [name for name in registry_names() if get_matrix(name).N <= max_dim]


# =============================================================================
# FORMATTING
# =============================================================================


def format_count(count: int, lower_bound: bool = False) -> str:
    """7200000 -> "7.2e+06"; lower bounds get a "> " prefix."""
    text = f"{count:.1e}"
    return f"> {text}" if lower_bound else text


def format_ratio(ratio: float, lower_bound: bool = False) -> str:
    text = f"{ratio:.1f}" if ratio >= 1.0 else f"{ratio:.2f}"
    return f"> {text}" if lower_bound else text


def format_precision(eps: float | None) -> str:
    return "-" if eps is None or pd.isna(eps) else f"{eps:.1e}"


def format_table(frame: pd.DataFrame) -> pd.DataFrame:
    """Formatted comparison table from the raw output of table_repro."""
    rows = []
    for record in frame.to_dict("records"):
        lower = bool(record["N_H_lower_bound"])
        rows.append({
            "N": int(record["N"]),
            "M": int(record["M"]),
            "N_p": format_count(int(record["N_p"]), bool(record["N_p_lower_bound"])),
            "eps_rel_p": format_precision(record["eps_rel_p"]),
            "N_H": format_count(int(record["N_H_reported"]), lower),
            "eps_rel_h": format_precision(record["eps_rel_h"]),
            "N_H/N_p": format_ratio(float(record["N_H/N_p"]), lower),
        })
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


# =============================================================================
# TABLE RUNS
# =============================================================================


def table_repro(
    suite: TableSuite | str,
    *,
    f_rel: float = 1e-3,
    baseline_budget: int = 10**7,
    partitioned_budget: int = 3 * 10**9,
    budget_per_simplex: int = 10**8,
    max_dim: int = 3,
    threads: int = 1,
    alpha: float = -0.2,
    beta: float = 0.1,
    matrices: list[str] | None = None,
    audit: AuditLogger | None = None,
) -> pd.DataFrame:
    """
    Raw comparison rows, one per matrix.

    N_H_reported is the baseline budget when the baseline ran out, which is
    the value a lower-bound entry prints; the ratio uses the same number.
    """
    suite = TableSuite(suite)
    family = SUITE_FAMILIES[suite]
    names = matrices if matrices is not None else suite_matrices(max_dim)

    rows = []
    for name in names:
        spec = IntegrandSpec(family=family, alpha=alpha, beta=beta, matrix=get_matrix(name))
        partitioned = run_partitioned(
            RunConfig(
                spec=spec,
                f_rel=f_rel,
                mode=RunMode.PARTITIONED,
                budget_per_simplex=budget_per_simplex,
                global_budget=partitioned_budget,
                threads=threads,
            ),
            audit=audit,
        )
        baseline = run_baseline(
            RunConfig(
                spec=spec,
                f_rel=f_rel,
                mode=RunMode.BASELINE,
                global_budget=baseline_budget,
            ),
            audit=audit,
        )
        reported = baseline_budget if baseline.lower_bound else baseline.n_evals
        ratio = reported / partitioned.n_evals if partitioned.n_evals else float("inf")
        logger.info(
            "%s %s: N_p=%d N_H=%d%s ratio=%.3g",
            suite.value, name, partitioned.n_evals, baseline.n_evals,
            " (budget)" if baseline.lower_bound else "", ratio,
        )
        rows.append({
            "matrix": name,
            "N": spec.matrix.N,
            "M": spec.matrix.M,
            "N_p": partitioned.n_evals,
            "N_p_lower_bound": partitioned.lower_bound,
            "eps_rel_p": partitioned.eps_rel_achieved,
            "I_p": partitioned.integral,
            "sigma_p": partitioned.sigma,
            "status_p": partitioned.status.value,
            "N_H": baseline.n_evals,
            "N_H_reported": reported,
            "N_H_lower_bound": baseline.lower_bound,
            "eps_rel_h": baseline.eps_rel_achieved,
            "I_h": baseline.integral,
            "sigma_h": baseline.sigma,
            "status_h": baseline.status.value,
            "N_H/N_p": ratio,
            "f_rel": f_rel,
        })
    return pd.DataFrame(rows)


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "TableSuite",
    "SUITE_FAMILIES",
    "TABLE_COLUMNS",
    "suite_matrices",
    "format_count",
    "format_ratio",
    "format_precision",
    "format_table",
    "table_repro",
]
