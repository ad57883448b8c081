"""
Run Audit Log

Tamper-evident record of integration runs: which matrix and integrand were
integrated, how the partition came out, what each precision pass cost, and
which report files were produced. Entries are appended to a JSONL file and
linked by a SHA-256 hash chain.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import uuid
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

logger = logging.getLogger(__name__)

FRAME_COLUMNS = [
    "timestamp", "entry_id", "run_id", "matrix", "mode", "action", "level",
    "stage", "n_evals", "duration_ms", "entry_hash",
]


# =============================================================================
# AUDIT ENUMS
# =============================================================================


class AuditAction(str, Enum):
    """Run events."""

    # Run lifecycle
    RUN_START = "run_start"
    RUN_COMPLETE = "run_complete"
    RUN_FAILED = "run_failed"

    # Integration stages
    PARTITION_COMPLETE = "partition_complete"
    PASS_COMPLETE = "pass_complete"
    BUDGET_EXHAUSTED = "budget_exhausted"

    # Inputs and outputs
    CONFIG_LOADED = "config_loaded"
    REPORT_WRITTEN = "report_written"


class AuditLevel(str, Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


# =============================================================================
# AUDIT ENTRY
# =============================================================================


class AuditEntry(BaseModel):
    """
    One audit record. `entry_hash` covers every other field, including the
    hash of the preceding entry.
    """

    entry_id: str = Field(default_factory=lambda: str(uuid.uuid4()))
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    run_id: str
    matrix: str = ""
    mode: str = ""
    stage: str = ""

    action: AuditAction
    level: AuditLevel = AuditLevel.INFO

    n_evals: int | None = None
    config_hash: str | None = None
    output_hash: str | None = None
    duration_ms: int | None = None
    details: dict[str, Any] = Field(default_factory=dict)

    previous_hash: str = ""
    entry_hash: str = ""

    def compute_hash(self) -> str:
        data = self.model_dump(mode="json", exclude={"entry_hash"})
        json_str = json.dumps(data, sort_keys=True, default=str)
        return hashlib.sha256(json_str.encode()).hexdigest()

    def with_hash(self, previous_hash: str = "") -> "AuditEntry":
        """Copy of the entry chained onto `previous_hash`."""
        chained = self.model_copy(update={"previous_hash": previous_hash})
        return chained.model_copy(update={"entry_hash": chained.compute_hash()})

    def verify_integrity(self) -> bool:
        return self.entry_hash == self.compute_hash()


def _finite_or_text(value: float | None) -> float | str | None:
    """Non-finite floats are stored as text so entries survive a JSON round trip."""
    if value is None or math.isfinite(value):
        return value
    return repr(value)


def content_hash(payload: Any) -> str:
    """Short SHA-256 of a JSON-serialisable payload (configs, report bodies)."""
    json_str = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(json_str.encode()).hexdigest()[:16]


# =============================================================================
# AUDIT LOGGER
# =============================================================================


class AuditLogger:
    """
    Append-only JSONL run log with a hash chain.

    Reopening an existing file continues its chain.
    """

    def __init__(
        self,
        audit_path: str | Path,
        run_id: str | None = None,
        matrix: str = "",
        mode: str = "",
    ):
        self.audit_path = Path(audit_path)
        self.audit_path.parent.mkdir(parents=True, exist_ok=True)

        self.run_id = run_id or str(uuid.uuid4())[:8]
        self.matrix = matrix
        self.mode = mode

        self._last_hash = ""
        self._entry_count = 0
        if self.audit_path.exists():
            self._load_last_hash()

    def _load_last_hash(self) -> None:
        lines = [line for line in self.audit_path.read_text().splitlines() if line.strip()]
        if not lines:
            return
        try:
            last = AuditEntry.model_validate_json(lines[-1])
        except ValidationError:
            logger.warning("audit log %s ends with an unreadable entry", self.audit_path)
            return
        self._last_hash = last.entry_hash
        self._entry_count = len(lines)

    @property
    def entry_count(self) -> int:
        return self._entry_count

    def log(self, entry: AuditEntry) -> AuditEntry:
        """Chain and append an entry."""
        entry = entry.with_hash(self._last_hash)
        with open(self.audit_path, "a") as f:
            f.write(entry.model_dump_json() + "\n")
        self._last_hash = entry.entry_hash
        self._entry_count += 1
        return entry

    def log_action(
        self,
        action: AuditAction,
        stage: str = "",
        level: AuditLevel = AuditLevel.INFO,
        n_evals: int | None = None,
        config_hash: str | None = None,
        output_hash: str | None = None,
        duration_ms: int | None = None,
        details: dict[str, Any] | None = None,
    ) -> AuditEntry:
        entry = AuditEntry(
            run_id=self.run_id,
            matrix=self.matrix,
            mode=self.mode,
            stage=stage,
            action=action,
            level=level,
            n_evals=n_evals,
            config_hash=config_hash,
            output_hash=output_hash,
            duration_ms=duration_ms,
            details=details or {},
        )
        return self.log(entry)

    def log_config_loaded(self, source: str, config: dict[str, Any]) -> AuditEntry:
        return self.log_action(
            action=AuditAction.CONFIG_LOADED,
            stage="config",
            config_hash=content_hash(config),
            details={"source": source},
        )

    def log_run_start(self, config: dict[str, Any]) -> AuditEntry:
        return self.log_action(
            action=AuditAction.RUN_START,
            stage="init",
            config_hash=content_hash(config),
            details={"config": config},
        )

    def log_partition(
        self,
        n_cones: int,
        n_simplices: int,
        padded_rows: int = 0,
        duration_ms: int | None = None,
    ) -> AuditEntry:
        """Partition summary: cones, simplicial cones, padding rows added."""
        return self.log_action(
            action=AuditAction.PARTITION_COMPLETE,
            stage="partition",
            duration_ms=duration_ms,
            details={
                "n_cones": n_cones,
                "n_simplices": n_simplices,
                "padded_rows": padded_rows,
            },
        )

    def log_pass(
        self,
        pass_number: int,
        n_integrated: int,
        n_evals: int,
        eps_abs: float | None = None,
        duration_ms: int | None = None,
        degraded: int = 0,
    ) -> AuditEntry:
        return self.log_action(
            action=AuditAction.PASS_COMPLETE,
            stage=f"pass{pass_number}",
            level=AuditLevel.WARNING if degraded else AuditLevel.INFO,
            n_evals=n_evals,
            duration_ms=duration_ms,
            details={
                "n_integrated": n_integrated,
                "eps_abs": _finite_or_text(eps_abs),
                "degraded": degraded,
            },
        )

    def log_budget_exhausted(self, stage: str, n_evals: int, budget: int) -> AuditEntry:
        return self.log_action(
            action=AuditAction.BUDGET_EXHAUSTED,
            stage=stage,
            level=AuditLevel.WARNING,
            n_evals=n_evals,
            details={"budget": budget},
        )

    def log_run_complete(
        self,
        status: str,
        integral: float,
        sigma: float,
        n_evals: int,
        duration_ms: int,
    ) -> AuditEntry:
        return self.log_action(
            action=AuditAction.RUN_COMPLETE,
            stage="complete",
            level=AuditLevel.INFO if status == "converged" else AuditLevel.WARNING,
            n_evals=n_evals,
            duration_ms=duration_ms,
            details={
                "status": status,
                "integral": _finite_or_text(integral),
                "sigma": _finite_or_text(sigma),
            },
        )

    def log_run_failed(
        self,
        error: str,
        stage: str = "",
        details: dict[str, Any] | None = None,
    ) -> AuditEntry:
        return self.log_action(
            action=AuditAction.RUN_FAILED,
            stage=stage,
            level=AuditLevel.ERROR,
            details={"error": error, **(details or {})},
        )

    def log_report_written(self, path: str | Path, payload: str) -> AuditEntry:
        return self.log_action(
            action=AuditAction.REPORT_WRITTEN,
            stage="write",
            output_hash=hashlib.sha256(payload.encode()).hexdigest()[:16],
            details={"path": str(path)},
        )

    # -------------------------------------------------------------------------

    def read_all(self) -> list[AuditEntry]:
        if not self.audit_path.exists():
            return []
        lines = self.audit_path.read_text().splitlines()
        return [AuditEntry.model_validate_json(line) for line in lines if line.strip()]

    def verify_chain_integrity(self) -> tuple[bool, list[str]]:
        """
        Recompute every entry hash and check that each entry points at its
        predecessor.

        Returns:
            (valid, problems); each problem names the entry index and the check
            that failed.
        """
        problems: list[str] = []
        expected_previous = ""
        for index, entry in enumerate(self.read_all()):
            label = f"entry {index} [{entry.action.value}, run {entry.run_id}]"
            if not entry.verify_integrity():
                problems.append(f"{label}: hash mismatch, stored {entry.entry_hash[:12]}")
            if entry.previous_hash != expected_previous:
                problems.append(f"{label}: broken link to the preceding entry")
            expected_previous = entry.entry_hash
        return not problems, problems

    def to_frame(self) -> pd.DataFrame:
        """One row per entry, without the free-form details."""
        records = [entry.model_dump(mode="json", exclude={"details"}) for entry in self.read_all()]
        return pd.DataFrame(records, columns=FRAME_COLUMNS)

    def export_csv(self, output_path: str | Path) -> int:
        frame = self.to_frame()
        if frame.empty:
            return 0
        frame.to_csv(output_path, index=False)
        return len(frame)

    def get_summary(self) -> dict[str, Any]:
        """Entry counts by action and level, and the evaluations of completed runs."""
        frame = self.to_frame()
        if frame.empty:
            return {"total_entries": 0}

        completed = frame[frame["action"] == AuditAction.RUN_COMPLETE.value]
        return {
            "total_entries": len(frame),
            "first_entry": frame["timestamp"].iloc[0],
            "last_entry": frame["timestamp"].iloc[-1],
            "actions": {str(k): int(v) for k, v in frame["action"].value_counts().items()},
            "levels": {str(k): int(v) for k, v in frame["level"].value_counts().items()},
            "run_ids": sorted(frame["run_id"].unique().tolist()),
            "runs_completed": len(completed),
            "total_evals": int(completed["n_evals"].fillna(0).sum()),
        }


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "AuditAction",
    "AuditLevel",
    "AuditEntry",
    "AuditLogger",
    "content_hash",
]
