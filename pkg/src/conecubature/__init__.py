"""
Cone Cubature

Adaptive cubature over all of R^N for integrands that are discontinuous on
a central hyperplane arrangement. Space is partitioned into simplicial cones
on which the integrand is smooth, each cone is mapped onto the unit
hypercube, and a two-pass precision controller drives an embedded degree-7
rule cell by cell.

Features:
- Cone enumeration for central arrangements, with row padding for M < N
- Simplicial decomposition of cones through a triangulated base
- Hypercube-to-cone and whole-space variable maps
- Genz-Malik degree-7/5 rule with a globally adaptive driver
- Two-pass partitioned runs and an unpartitioned baseline
- Monte Carlo validation oracle
- Hash-chain audit log of every run
"""

__version__ = "1.0.0"
__author__ = "Christopher Mangun"
__email__ = "cmangun@gmail.com"

# Arrangement
from .arrangement import (
    REGISTRY_MATRICES,
    Cone,
    DiscontinuityMatrix,
    SignPattern,
    candidate_rays,
    enumerate_cones,
    get_matrix,
    load_matrix_file,
    matrix_checksum,
    pad_matrix,
    parse_matrix_text,
    region_count_oracle,
    registry_names,
)

# Audit
from .audit import (
    AuditAction,
    AuditEntry,
    AuditLevel,
    AuditLogger,
)

# Cubature
from .cubature import (
    AdaptiveRegion,
    CubatureResult,
    CubatureStatus,
    EvaluationCounter,
    GenzMalikRule,
    Hyperrectangle,
    genz_malik_apply,
    integrate_adaptive,
    rule_for,
    rule_point_count,
)

# Errors
from .errors import (
    ConeCubatureError,
    ConfigFileError,
    DegenerateArrangementError,
    DegenerateConeError,
    DegenerateSimplexError,
    DomainError,
    GlobalBudgetExceeded,
    MatrixFormatError,
    RegionEvaluationError,
)

# Integrands
from .integrands import (
    BaseIntegrand,
    CallableIntegrand,
    GreenFunctionIntegrand,
    IntegrandFamily,
    IntegrandSpec,
    build_integrand,
    factor,
    integrand,
)

# Mapping
from .mapping import (
    MappedIntegrand,
    OrthantMap,
    ReciprocalOrthantMap,
    WholeSpaceIntegrand,
    hypercube_to_orthant,
    mapped_eval,
    simplex_point,
    whole_space_map,
)

# Oracle
from .oracle import OracleResult, mc_estimate

# Orchestrator
from .orchestrator import (
    ErrorFormula,
    Partition,
    RunConfig,
    RunMode,
    RunReport,
    RunStatus,
    SimplexEstimate,
    aggregate,
    build_partition,
    run,
    run_baseline,
    run_partitioned,
    write_reports,
)

# Tables
from .tables import TableSuite, format_table, table_repro

# Triangulation
from .triangulation import (
    BaseProjection,
    SimplicialCone,
    cone_axis,
    decompose_all,
    decompose_cone,
    partition_dump,
    project_to_base,
    triangulate_base,
)


__all__ = [
    # Version
    "__version__",
    # Arrangement
    "REGISTRY_MATRICES",
    "Cone",
    "DiscontinuityMatrix",
    "SignPattern",
    "candidate_rays",
    "enumerate_cones",
    "get_matrix",
    "load_matrix_file",
    "matrix_checksum",
    "pad_matrix",
    "parse_matrix_text",
    "region_count_oracle",
    "registry_names",
    # Audit
    "AuditAction",
    "AuditEntry",
    "AuditLevel",
    "AuditLogger",
    # Cubature
    "AdaptiveRegion",
    "CubatureResult",
    "CubatureStatus",
    "EvaluationCounter",
    "GenzMalikRule",
    "Hyperrectangle",
    "genz_malik_apply",
    "integrate_adaptive",
    "rule_for",
    "rule_point_count",
    # Errors
    "ConeCubatureError",
    "ConfigFileError",
    "DegenerateArrangementError",
    "DegenerateConeError",
    "DegenerateSimplexError",
    "DomainError",
    "GlobalBudgetExceeded",
    "MatrixFormatError",
    "RegionEvaluationError",
    # Integrands
    "BaseIntegrand",
    "CallableIntegrand",
    "GreenFunctionIntegrand",
    "IntegrandFamily",
    "IntegrandSpec",
    "build_integrand",
    "factor",
    "integrand",
    # Mapping
    "MappedIntegrand",
    "OrthantMap",
    "ReciprocalOrthantMap",
    "WholeSpaceIntegrand",
    "hypercube_to_orthant",
    "mapped_eval",
    "simplex_point",
    "whole_space_map",
    # Oracle
    "OracleResult",
    "mc_estimate",
    # Orchestrator
    "ErrorFormula",
    "Partition",
    "RunConfig",
    "RunMode",
    "RunReport",
    "RunStatus",
    "SimplexEstimate",
    "aggregate",
    "build_partition",
    "run",
    "run_baseline",
    "run_partitioned",
    "write_reports",
    # Tables
    "TableSuite",
    "format_table",
    "table_repro",
    # Triangulation
    "BaseProjection",
    "SimplicialCone",
    "cone_axis",
    "decompose_all",
    "decompose_cone",
    "partition_dump",
    "project_to_base",
    "triangulate_base",
]
