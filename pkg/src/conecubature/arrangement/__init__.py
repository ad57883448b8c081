"""Hyperplane arrangement: discontinuity matrices and cone enumeration."""

from .cones import (
    FEASIBILITY_TOL,
    Cone,
    SignPattern,
    candidate_rays,
    enumerate_cones,
    pattern_string,
    region_count_oracle,
    sign_patterns,
)
from .matrix import (
    REGISTRY_MATRICES,
    PADDING_SEED,
    DiscontinuityMatrix,
    format_matrix_text,
    get_matrix,
    load_matrix_file,
    matrix_checksum,
    numerical_rank,
    pad_matrix,
    parse_matrix_text,
    registry_names,
)

__all__ = [
    # Matrices
    "DiscontinuityMatrix",
    "PADDING_SEED",
    "numerical_rank",
    "matrix_checksum",
    "pad_matrix",
    "parse_matrix_text",
    "load_matrix_file",
    "format_matrix_text",
    "REGISTRY_MATRICES",
    "registry_names",
    "get_matrix",
    # Cones
    "SignPattern",
    "Cone",
    "FEASIBILITY_TOL",
    "pattern_string",
    "sign_patterns",
    "candidate_rays",
    "enumerate_cones",
    "region_count_oracle",
]
