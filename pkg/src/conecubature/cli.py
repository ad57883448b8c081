"""
Command-Line Interface

    conecubature run --matrix C3x2 --family F1 --frel 1e-3 --out results
    conecubature run --config run.toml --mode baseline
    conecubature oracle --matrix C3x2 --samples 10000000 --seed 42
    conecubature partition-dump --matrix C6x3
    conecubature table-repro f1_desk --frel 1e-3 --budget 10000000

`run` exits 0 when every integration converged, 2 when the run was degraded
or aborted by a budget, and 1 on invalid input.
"""

from __future__ import annotations

import argparse
import logging
import sys
import tomllib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .arrangement import PADDING_SEED, DiscontinuityMatrix, get_matrix, load_matrix_file
from .audit import AuditLogger
from .errors import ConeCubatureError, ConfigFileError
from .integrands import IntegrandFamily, IntegrandSpec
from .oracle import DEFAULT_BLOCK_SIZE, MIN_SAMPLES, mc_estimate
from .orchestrator import (
    ErrorFormula,
    RunConfig,
    RunMode,
    RunStatus,
    build_partition,
    run_baseline,
    run_partitioned,
    write_reports,
)
from .tables import TableSuite, format_table, table_repro
from .triangulation import partition_dump

DEFAULT_OUT = Path("results")
DEFAULT_ORACLE_SEED = 42
DEFAULT_ORACLE_SAMPLES = 10**6

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DEGRADED = 2


# =============================================================================
# SETTINGS
# =============================================================================


class Settings(BaseModel):
    """
    Flat run settings from a config file and/or flags. Unset fields fall back
    to the RunConfig and IntegrandSpec defaults.
    """

    model_config = ConfigDict(extra="forbid")

    matrix: str | None = None
    matrix_file: Path | None = None
    family: IntegrandFamily | None = None
    alpha: float | None = None
    beta: float | None = None
    f_rel: float | None = None
    pass1_rel: float | None = None
    mode: RunMode | None = None
    budget_per_simplex: int | None = None
    global_budget: int | None = None
    threads: int | None = None
    error_formula: ErrorFormula | None = None
    seed: int | None = None
    samples: int | None = Field(default=None, ge=MIN_SAMPLES)
    out: Path | None = None
    audit: Path | None = None

    def load_matrix(self) -> DiscontinuityMatrix:
        if self.matrix and self.matrix_file:
            raise ConfigFileError("give either matrix or matrix_file, not both")
        if self.matrix:
            try:
                return get_matrix(self.matrix)
            except KeyError as e:
                raise ConfigFileError(str(e.args[0])) from None
        if self.matrix_file:
            return load_matrix_file(self.matrix_file)
        raise ConfigFileError("one of matrix or matrix_file is required")

    def _given(self, *names: str) -> dict[str, Any]:
        return {name: getattr(self, name) for name in names if getattr(self, name) is not None}

    def integrand_spec(self, matrix: DiscontinuityMatrix | None = None) -> IntegrandSpec:
        return IntegrandSpec(
            matrix=matrix if matrix is not None else self.load_matrix(),
            **self._given("family", "alpha", "beta"),
        )

    def run_config(self, matrix: DiscontinuityMatrix | None = None) -> RunConfig:
        if self.f_rel is None:
            raise ConfigFileError("f_rel is required")
        fields = self._given(
            "f_rel", "pass1_rel", "mode", "budget_per_simplex",
            "global_budget", "threads", "error_formula",
        )
        if self.seed is not None:
            fields["padding_seed"] = self.seed
        return RunConfig(spec=self.integrand_spec(matrix), **fields)


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a TOML key-value file; relative matrix_file paths are anchored to it."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as e:
        raise ConfigFileError(f"{path}: {e}") from e
    except OSError as e:
        raise ConfigFileError(f"{path}: {e.strerror}") from e
    if "matrix_file" in data and isinstance(data["matrix_file"], str):
        matrix_file = Path(data["matrix_file"])
        if not matrix_file.is_absolute():
            data["matrix_file"] = str(path.parent / matrix_file)
    return data


FLAG_KEYS = {
    "matrix": "matrix",
    "matrix_file": "matrix_file",
    "family": "family",
    "alpha": "alpha",
    "beta": "beta",
    "frel": "f_rel",
    "pass1_rel": "pass1_rel",
    "mode": "mode",
    "budget": "budget_per_simplex",
    "global_budget": "global_budget",
    "threads": "threads",
    "error_formula": "error_formula",
    "seed": "seed",
    "samples": "samples",
    "out": "out",
    "audit": "audit",
}


def resolve_settings(args: argparse.Namespace) -> tuple[Settings, dict[str, Any]]:
    """File values first, then any flag given on the command line."""
    file_data: dict[str, Any] = {}
    if getattr(args, "config", None):
        file_data = read_config_file(args.config)
    merged = dict(file_data)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[key] = value
    return Settings.model_validate(merged), file_data


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


# =============================================================================
# COMMANDS
# =============================================================================


def cmd_run(args: argparse.Namespace) -> int:
    settings, file_data = resolve_settings(args)
    matrix = settings.load_matrix()
    config = settings.run_config(matrix)
    out = settings.out or DEFAULT_OUT

    audit = AuditLogger(
        settings.audit or out / "audit.jsonl",
        matrix=matrix.name,
        mode=config.mode.value,
    )
    if file_data:
        audit.log_config_loaded(str(args.config), file_data)

    print(f"Running {config.mode.value} {config.spec.family.value} on {matrix.name or 'matrix'} "
          f"(N={matrix.N}, M={matrix.M}, f_rel={config.f_rel:g})...")

    if config.mode == RunMode.PARTITIONED:
        partition = build_partition(matrix, config.threads, config.padding_seed)
        cost = partition.minimum_cost()
        if cost > config.global_budget:
            message = (
                f"minimum cost {cost:.2e} evaluations ({partition.nu} simplices x 2 passes) "
                f"exceeds global budget {config.global_budget:.2e}; lower f_rel or raise the budget"
            )
            print(f"warning: {message}", file=sys.stderr)
        report = run_partitioned(config, audit=audit, partition=partition)
    else:
        report = run_baseline(config, audit=audit)

    json_path, csv_path = write_reports(report, out, audit=audit)

    eps = report.eps_rel_achieved
    achieved = f" (eps_rel = {eps:.2e})" if eps is not None else ""
    print(f"I = {report.integral:.10g} +- {report.sigma:.3g}{achieved}")
    bound = "> " if report.lower_bound else ""
    print(f"{report.count_label} = {bound}{report.n_evals} evaluations, nu = {report.nu}, "
          f"status = {report.status.value}")
    print(f"Reports: {json_path}, {csv_path}")
    return EXIT_OK if report.status == RunStatus.CONVERGED else EXIT_DEGRADED


def cmd_oracle(args: argparse.Namespace) -> int:
    settings, _ = resolve_settings(args)
    spec = settings.integrand_spec()
    result = mc_estimate(
        spec,
        settings.samples or DEFAULT_ORACLE_SAMPLES,
        settings.seed if settings.seed is not None else DEFAULT_ORACLE_SEED,
        block_size=args.block_size,
        workers=settings.threads or 1,
    )
    payload = result.model_dump_json(indent=2)
    if settings.out is not None:
        settings.out.mkdir(parents=True, exist_ok=True)
        (settings.out / "oracle.json").write_text(payload)
    print(payload)
    return EXIT_OK


def cmd_partition_dump(args: argparse.Namespace) -> int:
    settings, _ = resolve_settings(args)
    matrix = settings.load_matrix()
    seed = settings.seed if settings.seed is not None else PADDING_SEED
    partition = build_partition(matrix, settings.threads or 1, seed)
    text = partition_dump(partition.cones, partition.simplices)
    if args.output:
        Path(args.output).write_text(text)
    print(f"# {matrix.name or 'matrix'}: {partition.n_cones} cones, {partition.nu} simplices")
    print(text, end="")
    return EXIT_OK


def cmd_table_repro(args: argparse.Namespace) -> int:
    out = Path(args.out) if args.out else DEFAULT_OUT
    out.mkdir(parents=True, exist_ok=True)
    audit = AuditLogger(args.audit or out / "audit.jsonl", mode="table")
    raw = table_repro(
        args.suite,
        f_rel=args.frel,
        baseline_budget=args.budget,
        max_dim=args.max_dim,
        threads=args.threads,
        matrices=args.matrices,
        audit=audit,
    )
    table = format_table(raw)
    raw.to_csv(out / f"{args.suite}_raw.csv", index=False)
    table.to_csv(out / f"{args.suite}.csv", index=False)
    print(table.to_string(index=False))
    return EXIT_OK


# =============================================================================
# PARSER
# =============================================================================


def _add_matrix_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", help="TOML key-value run configuration")
    parser.add_argument("--matrix", "-m", help="Registry matrix name, e.g. C3x2")
    parser.add_argument("--matrix-file", dest="matrix_file", help="Matrix text file")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--seed", type=int, help="Random seed")


def _add_integrand_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=[f.value for f in IntegrandFamily])
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conecubature",
        description="Adaptive cubature over R^N for integrands with hyperplane discontinuities",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="INFO-level logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Integrate and write JSON/CSV reports")
    _add_matrix_args(run)
    _add_integrand_args(run)
    run.add_argument("--frel", type=float, help="Requested relative precision")
    run.add_argument("--pass1-rel", dest="pass1_rel", type=float, help="Pass-1 relative precision")
    run.add_argument("--mode", choices=[m.value for m in RunMode])
    run.add_argument("--budget", type=int, help="Evaluation budget per simplex")
    run.add_argument("--global-budget", dest="global_budget", type=int, help="Run-wide evaluation cap")
    run.add_argument("--error-formula", dest="error_formula", choices=[e.value for e in ErrorFormula])
    run.add_argument("--out", "-o", help="Report directory")
    run.add_argument("--audit", "-a", help="Audit log (JSONL); default <out>/audit.jsonl")
    run.set_defaults(handler=cmd_run)

    oracle = commands.add_parser("oracle", help="Monte Carlo estimate of the integral")
    _add_matrix_args(oracle)
    _add_integrand_args(oracle)
    oracle.add_argument("--samples", type=int)
    oracle.add_argument("--block-size", dest="block_size", type=int, default=DEFAULT_BLOCK_SIZE)
    oracle.add_argument("--out", "-o", help="Also write oracle.json here")
    oracle.set_defaults(handler=cmd_oracle)

    dump = commands.add_parser("partition-dump", help="List cones, rays and simplices")
    _add_matrix_args(dump)
    dump.add_argument("--output", help="Also write the dump to this file")
    dump.set_defaults(handler=cmd_partition_dump)

    tables = commands.add_parser("table-repro", help="Partitioned vs baseline comparison table")
    tables.add_argument("suite", choices=[s.value for s in TableSuite])
    tables.add_argument("--frel", type=float, default=1e-3)
    tables.add_argument("--budget", type=int, default=10**7, help="Baseline evaluation budget")
    tables.add_argument("--max-dim", dest="max_dim", type=int, default=3)
    tables.add_argument("--threads", type=int, default=1)
    tables.add_argument("--matrices", nargs="+", help="Restrict to these registry names")
    tables.add_argument("--out", "-o", help="Output directory")
    tables.add_argument("--audit", "-a", help="Audit log (JSONL)")
    tables.set_defaults(handler=cmd_table_repro)
    return parser


def main(argv: list[str] | None = None) -> int:
    """CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return int(args.handler(args))
    except ValidationError as e:
        print(f"error: invalid configuration: {_validation_message(e)}", file=sys.stderr)
    except ConeCubatureError as e:
        print(f"error: {e}", file=sys.stderr)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
