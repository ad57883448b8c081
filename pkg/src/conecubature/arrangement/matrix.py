"""
Discontinuity Matrices

The M x N matrix C whose rows are the normals of the hyperplanes on which the
integrand is discontinuous. Includes the named test-matrix registry, the
plain-text matrix format and row padding for arrangements with too few
hyperplanes.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections.abc import Mapping
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import MatrixFormatError

logger = logging.getLogger(__name__)

ZERO_ROW_TOL = 1e-14
PARALLEL_TOL = 1e-9
PADDING_SEED = 20_240_517
PADDING_PARALLEL_TOL = 1e-6
RANK_RCOND = 1e-10


# =============================================================================
# MATRIX MODEL
# =============================================================================


def numerical_rank(a: np.ndarray, rcond: float = RANK_RCOND) -> int:
    """Rank from singular values with a cutoff relative to the largest one."""
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rcond * s[0]))


class DiscontinuityMatrix(BaseModel):
    """
    Hyperplane normals of a central arrangement.

    Rows appended by padding are flagged in `padded`: they cut space into
    extra cells but never contribute a factor to the integrand.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rows: list[list[float]] = Field(..., min_length=1)
    padded: list[bool] = Field(default_factory=list)
    name: str = ""

    @model_validator(mode="before")
    @classmethod
    def default_flags(cls, data: Any) -> Any:
        """Fill in all-false padding flags when none are given."""
        if isinstance(data, dict) and not data.get("padded"):
            rows = data.get("rows") or []
            data = {**data, "padded": [False] * len(rows)}
        return data

    @model_validator(mode="after")
    def validate_rows(self) -> "DiscontinuityMatrix":
        """Rows must be rectangular, finite, nonzero and pairwise non-parallel."""
        width = len(self.rows[0])
        if width < 2:
            raise ValueError("dimension N must be at least 2")
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} entries, expected {width}")
        if len(self.padded) != len(self.rows):
            raise ValueError(
                f"padded has {len(self.padded)} flags for {len(self.rows)} rows"
            )
        if not any(not flag for flag in self.padded):
            raise ValueError("at least one row must be an original (non-padding) row")

        a = np.asarray(self.rows, dtype=float)
        if not np.all(np.isfinite(a)):
            bad = int(np.argwhere(~np.isfinite(a))[0][0])
            raise ValueError(f"row {bad} has non-finite entries")

        norms = np.linalg.norm(a, axis=1)
        for i, norm in enumerate(norms):
            if norm <= ZERO_ROW_TOL:
                raise ValueError(f"row {i} is zero")

        unit = a / norms[:, None]
        cosines = np.abs(unit @ unit.T)
        for i in range(len(unit)):
            for j in range(i + 1, len(unit)):
                if cosines[i, j] > 1.0 - PARALLEL_TOL:
                    raise ValueError(f"row {j} is parallel to row {i}")
        return self

    @classmethod
    def from_array(
        cls,
        array: Any,
        name: str = "",
        padded: list[bool] | None = None,
    ) -> "DiscontinuityMatrix":
        """Build from anything numpy can turn into a 2-D float array."""
        a = np.asarray(array, dtype=float)
        if a.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {a.shape}")
        return cls(rows=a.tolist(), padded=padded or [], name=name)

    @property
    def M(self) -> int:
        """Number of rows, padding included."""
        return len(self.rows)

    @property
    def N(self) -> int:
        """Dimension of the integration space."""
        return len(self.rows[0])

    @property
    def array(self) -> np.ndarray:
        """All rows as an (M, N) float array."""
        return np.asarray(self.rows, dtype=float)

    @property
    def original_array(self) -> np.ndarray:
        """Only the non-padding rows, in their original order."""
        keep = [i for i, flag in enumerate(self.padded) if not flag]
        return self.array[keep]

    @property
    def n_original(self) -> int:
        return sum(1 for flag in self.padded if not flag)

    @property
    def rank(self) -> int:
        return numerical_rank(self.array)

    def checksum(self) -> str:
        """SHA-256 of the canonical JSON of the rows."""
        return matrix_checksum(self.rows)


def matrix_checksum(rows: Any) -> str:
    """Checksum over rows serialised as compact JSON floats."""
    canonical = [[float(v) for v in row] for row in rows]
    json_str = json.dumps(canonical, separators=(",", ":"))
    return hashlib.sha256(json_str.encode()).hexdigest()


# =============================================================================
# PADDING
# =============================================================================


def pad_matrix(
    matrix: DiscontinuityMatrix,
    dimension: int | None = None,
    seed: int = PADDING_SEED,
) -> DiscontinuityMatrix:
    """
    Append flagged rows until M >= N and rank(C) = N.

    New rows are drawn from a fixed-seed normal stream and rejected while they
    are nearly parallel to an existing row, so the padding is reproducible.
    A matrix that already qualifies is returned unchanged.
    """
    n = dimension if dimension is not None else matrix.N
    if n != matrix.N:
        raise ValueError(f"matrix has {matrix.N} columns, expected {n}")
    if matrix.M >= n and matrix.rank == n:
        return matrix

    rows = [list(r) for r in matrix.rows]
    flags = list(matrix.padded)
    rng = np.random.default_rng(seed)

    while len(rows) < n or numerical_rank(np.asarray(rows)) < n:
        candidate = rng.standard_normal(n)
        candidate /= np.linalg.norm(candidate)
        existing = np.asarray(rows)
        existing = existing / np.linalg.norm(existing, axis=1)[:, None]
        if np.max(np.abs(existing @ candidate)) >= 1.0 - PADDING_PARALLEL_TOL:
            continue
        # once M >= N only rank-raising rows help
        if len(rows) >= n and numerical_rank(np.vstack([existing, candidate])) == (
            numerical_rank(existing)
        ):
            continue
        rows.append(candidate.tolist())
        flags.append(True)

    logger.debug("padded %s from %d to %d rows", matrix.name or "matrix", matrix.M, len(rows))
    return DiscontinuityMatrix(rows=rows, padded=flags, name=matrix.name)


# =============================================================================
# TEXT FORMAT
# =============================================================================


def _parse_number(token: str, line: int) -> float:
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError) as e:
        raise MatrixFormatError(f"cannot parse number {token!r}", line) from e


def parse_matrix_text(text: str, name: str = "") -> DiscontinuityMatrix:
    """
    Parse the plain-text format: a header line "M N" followed by M rows of N
    numbers. Blank lines and '#' comments are ignored; entries may be decimals
    or fractions such as 1/2.
    """
    lines = [
        (number, raw.split("#", 1)[0].strip())
        for number, raw in enumerate(text.splitlines(), start=1)
    ]
    lines = [(number, content) for number, content in lines if content]
    if not lines:
        raise MatrixFormatError("empty matrix text")

    header_line, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise MatrixFormatError(f"header must be 'M N', got {header!r}", header_line)
    m, n = int(parts[0]), int(parts[1])

    body = lines[1:]
    if len(body) != m:
        line = body[-1][0] if body else header_line
        raise MatrixFormatError(f"expected {m} rows, found {len(body)}", line)

    rows: list[list[float]] = []
    for number, content in body:
        tokens = content.split()
        if len(tokens) != n:
            raise MatrixFormatError(f"expected {n} entries, found {len(tokens)}", number)
        rows.append([_parse_number(tok, number) for tok in tokens])

    try:
        return DiscontinuityMatrix(rows=rows, name=name)
    except ValueError as e:
        raise MatrixFormatError(str(e)) from e


def load_matrix_file(path: str | Path) -> DiscontinuityMatrix:
    """Read a matrix file in the plain-text format."""
    path = Path(path)
    return parse_matrix_text(path.read_text(), name=path.stem)


def format_matrix_text(matrix: DiscontinuityMatrix) -> str:
    """Inverse of parse_matrix_text (padding flags are not represented)."""
    lines = [f"{matrix.M} {matrix.N}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in matrix.rows)
    return "\n".join(lines) + "\n"


# =============================================================================
# MATRIX REGISTRY
# =============================================================================


_H = 0.5

REGISTRY_MATRICES: Mapping[str, tuple[tuple[float, ...], ...]] = MappingProxyType({
    "C3x2": (
        (1, 0),
        (0, 1),
        (1, 1),
    ),
    "C4x2": (
        (1, 0),
        (0, 1),
        (2, 1),
        (1, -1),
    ),
    "C5x2": (
        (1, 0),
        (0, 1),
        (2, 1),
        (1, -1),
        (-1, 2),
    ),
    "C6x2": (
        (1, 0),
        (0, 1),
        (2, 1),
        (1, 1),
        (1, -1),
        (-1, 2),
    ),
    "C5x3": (
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (1, 1, -1),
        (-1, 2, 1),
    ),
    "C6x3": (
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (1, -1, 1),
        (1, 1, -1),
        (-1, 2, 1),
    ),
    "C7x3": (
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (2, 1, -1),
        (1, 1, 1),
        (1, 1, -1),
        (-1, _H, 2),
    ),
    "C8x3": (
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (2, 1, -1),
        (1, 1, 1),
        (1, 1, -1),
        (_H, _H, 1),
        (-1, _H, 2),
    ),
    "C9x3": (
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (2, 1, -1),
        (_H, 2, 1),
        (-1, 1, _H),
        (2, -1, 1),
        (1, 1, -1),
        (-1, _H, 2),
    ),
    "C7x4": (
        (1, 0, 0, 0),
        (0, 1, 0, 0),
        (0, 0, 1, 0),
        (0, 0, 0, 1),
        (1, 1, 1, 1),
        (1, 2, 1, 2),
        (1, -2, 2, 1),
    ),
    "C9x5": (
        (1, 0, 0, 0, 0),
        (0, 1, 0, 0, 0),
        (0, 0, 1, 0, 0),
        (0, 0, 0, 1, 0),
        (0, 0, 0, 0, 1),
        (1, 1, 1, 1, 1),
        (_H, 1, _H, 1, _H),
        (-1, -1, _H, 1, 2),
        (2, 1, -_H, 2, -_H),
    ),
})


def registry_names() -> list[str]:
    """Registry keys ordered by (N, M)."""
    def key(name: str) -> tuple[int, int]:
        m, n = name[1:].split("x")
        return int(n), int(m)
    return sorted(REGISTRY_MATRICES, key=key)


def get_matrix(name: str) -> DiscontinuityMatrix:
    """Look up a registry matrix by name, e.g. "C6x3"."""
    try:
        rows = REGISTRY_MATRICES[name]
    except KeyError:
        known = ", ".join(registry_names())
        raise KeyError(f"unknown matrix {name!r}; known: {known}") from None
    return DiscontinuityMatrix(rows=[[float(v) for v in row] for row in rows], name=name)


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "DiscontinuityMatrix",
    "numerical_rank",
    "matrix_checksum",
    "pad_matrix",
    "parse_matrix_text",
    "load_matrix_file",
    "format_matrix_text",
    "REGISTRY_MATRICES",
    "registry_names",
    "get_matrix",
]
