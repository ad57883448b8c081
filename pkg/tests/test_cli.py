"""Tests for the command-line interface."""

import json
from pathlib import Path

import pandas as pd
import pytest

from conecubature.arrangement import format_matrix_text, get_matrix
from conecubature.audit import AuditAction, AuditLogger
from conecubature.cli import EXIT_DEGRADED, EXIT_INVALID, EXIT_OK, main


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


class TestRunCommand:
    """Tests for `conecubature run`."""

    def test_partitioned_run(self, tmp_path: Path, capsys):
        """Test reports land in --out and the summary is printed."""
        code = main(["run", "--matrix", "C3x2", "--frel", "0.05", "--out", str(tmp_path)])

        assert code in (EXIT_OK, EXIT_DEGRADED)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["nu"] == 6
        assert report["mode"] == "partitioned"
        assert (tmp_path / "report_simplices.csv").exists()
        assert "N_p = " in capsys.readouterr().out

    def test_baseline_csv(self, tmp_path: Path):
        """Test the baseline row is labelled N_H."""
        code = main([
            "run", "--matrix", "C3x2", "--frel", "0.05", "--mode", "baseline",
            "--global-budget", "10000", "--out", str(tmp_path),
        ])

        row = pd.read_csv(tmp_path / "report.csv")
        assert code in (EXIT_OK, EXIT_DEGRADED)
        assert "N_H" in row.columns
        assert row["N_H"].iloc[0] <= 10_000

    def test_audit_chain(self, tmp_path: Path):
        """Test the run leaves a verifiable audit log beside the reports."""
        main(["run", "--matrix", "C3x2", "--frel", "0.05", "--out", str(tmp_path)])

        audit = AuditLogger(tmp_path / "audit.jsonl")
        actions = [e.action for e in audit.read_all()]
        assert actions[0] == AuditAction.RUN_START
        assert actions[-2:] == [AuditAction.REPORT_WRITTEN, AuditAction.REPORT_WRITTEN]
        assert audit.verify_chain_integrity()[0]

    def test_budget_warning(self, tmp_path: Path, capsys):
        """Test an unreachable global budget is flagged and the run aborts."""
        code = main([
            "run", "--matrix", "C3x2", "--frel", "0.05", "--global-budget", "100",
            "--out", str(tmp_path),
        ])

        assert code == EXIT_DEGRADED
        assert "minimum cost" in capsys.readouterr().err
        assert json.loads((tmp_path / "report.json").read_text())["status"] == "aborted"

    def test_matrix_file(self, tmp_path: Path):
        """Test a matrix given as a text file."""
        matrix_file = _write(tmp_path / "c.txt", format_matrix_text(get_matrix("C4x2")))

        code = main([
            "run", "--matrix-file", str(matrix_file), "--frel", "0.05",
            "--out", str(tmp_path / "out"),
        ])

        assert code in (EXIT_OK, EXIT_DEGRADED)
        assert json.loads((tmp_path / "out" / "report.json").read_text())["nu"] == 8


class TestConfigFile:
    """Tests for TOML run configuration."""

    def test_config_run(self, tmp_path: Path):
        """Test a key-value file drives the run."""
        out = tmp_path / "out"
        config = _write(
            tmp_path / "run.toml",
            f'matrix = "C3x2"\nfamily = "F2"\nf_rel = 0.05\nout = "{out}"\n',
        )

        code = main(["run", "--config", str(config)])

        report = json.loads((out / "report.json").read_text())
        assert code in (EXIT_OK, EXIT_DEGRADED)
        assert report["family"] == "F2"
        assert AuditLogger(out / "audit.jsonl").read_all()[0].action == AuditAction.CONFIG_LOADED

    def test_flags_override_file(self, tmp_path: Path):
        """Test command-line values win over the file."""
        config = _write(tmp_path / "run.toml", 'matrix = "C3x2"\nf_rel = 0.5\n')

        main(["run", "-c", str(config), "--frel", "0.05", "--out", str(tmp_path)])

        assert json.loads((tmp_path / "report.json").read_text())["f_rel"] == 0.05

    def test_relative_matrix_file(self, tmp_path: Path):
        """Test matrix_file is resolved against the config file's directory."""
        config_dir = tmp_path / "configs"
        _write(config_dir / "c3.txt", format_matrix_text(get_matrix("C3x2")))
        config = _write(config_dir / "run.toml", 'matrix_file = "c3.txt"\nf_rel = 0.05\n')

        code = main(["run", "-c", str(config), "--out", str(tmp_path / "out")])

        assert code in (EXIT_OK, EXIT_DEGRADED)
        assert json.loads((tmp_path / "out" / "report.json").read_text())["matrix_name"] == "c3"

    def test_malformed_toml(self, tmp_path: Path, capsys):
        """Test syntax errors are reported with their position."""
        config = _write(tmp_path / "run.toml", 'matrix = "C3x2\nf_rel = 0.05\n')

        code = main(["run", "-c", str(config)])

        assert code == EXIT_INVALID
        assert "line" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path: Path, capsys):
        """Test misspelt keys are rejected."""
        config = _write(tmp_path / "run.toml", 'matrix = "C3x2"\nfrel = 0.05\n')

        code = main(["run", "-c", str(config)])

        assert code == EXIT_INVALID
        assert "frel" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path: Path):
        """Test an unreadable config path."""
        assert main(["run", "-c", str(tmp_path / "absent.toml")]) == EXIT_INVALID


class TestInvalidInput:
    """Tests for exit code 1."""

    def test_unknown_matrix(self, tmp_path: Path, capsys):
        """Test registry lookups list the known names."""
        code = main(["run", "--matrix", "C2x9", "--frel", "0.05", "--out", str(tmp_path)])

        assert code == EXIT_INVALID
        assert "C3x2" in capsys.readouterr().err

    def test_missing_f_rel(self, tmp_path: Path, capsys):
        """Test f_rel is required for runs."""
        code = main(["run", "--matrix", "C3x2", "--out", str(tmp_path)])

        assert code == EXIT_INVALID
        assert "f_rel" in capsys.readouterr().err

    @pytest.mark.parametrize("f_rel", ["1.0", "0", "-0.5"])
    def test_f_rel_out_of_range(self, tmp_path: Path, f_rel):
        """Test 0 < f_rel < 1."""
        assert main(["run", "--matrix", "C3x2", "--frel", f_rel, "--out", str(tmp_path)]) == EXIT_INVALID

    def test_matrix_and_file(self, tmp_path: Path):
        """Test the two matrix sources are exclusive."""
        matrix_file = _write(tmp_path / "c.txt", format_matrix_text(get_matrix("C3x2")))

        code = main([
            "run", "--matrix", "C3x2", "--matrix-file", str(matrix_file), "--frel", "0.05",
            "--out", str(tmp_path),
        ])

        assert code == EXIT_INVALID

    def test_bad_matrix_text(self, tmp_path: Path, capsys):
        """Test parse errors name the offending line."""
        matrix_file = _write(tmp_path / "c.txt", "2 2\n1 0\n0 x\n")

        code = main(["run", "--matrix-file", str(matrix_file), "--frel", "0.05"])

        assert code == EXIT_INVALID
        assert "line 3" in capsys.readouterr().err

    def test_budget_below_one_rule_application(self, tmp_path: Path, capsys):
        """Test a per-cell budget under 17 points is rejected up front."""
        code = main([
            "run", "--matrix", "C3x2", "--frel", "1e-3", "--budget", "10",
            "--out", str(tmp_path),
        ])

        assert code == EXIT_INVALID
        assert "below one rule application" in capsys.readouterr().err
        assert not (tmp_path / "report.json").exists()

    def test_oracle_too_few_samples(self, tmp_path: Path, capsys):
        """Test the oracle needs at least 10^4 samples."""
        code = main([
            "oracle", "--matrix", "C3x2", "--samples", "100", "--out", str(tmp_path),
        ])

        assert code == EXIT_INVALID
        assert "samples" in capsys.readouterr().err


class TestOtherCommands:
    """Tests for oracle, partition-dump and table-repro."""

    def test_partition_dump(self, tmp_path: Path, capsys):
        """Test the header line and the dump file."""
        output = tmp_path / "dump.txt"

        code = main(["partition-dump", "--matrix", "C3x2", "--output", str(output)])

        printed = capsys.readouterr().out
        assert code == EXIT_OK
        assert printed.splitlines()[0] == "# C3x2: 6 cones, 6 simplices"
        assert output.read_text() in printed

    def test_oracle(self, tmp_path: Path):
        """Test the oracle writes its JSON result."""
        code = main([
            "oracle", "--matrix", "C3x2", "--samples", "10000", "--seed", "1",
            "--out", str(tmp_path),
        ])

        result = json.loads((tmp_path / "oracle.json").read_text())
        assert code == EXIT_OK
        assert result["samples"] == 10_000
        assert result["seed"] == 1

    def test_table_repro(self, tmp_path: Path, capsys):
        """Test the formatted and raw tables are written."""
        code = main([
            "table-repro", "f1_desk", "--frel", "0.05", "--budget", "10000",
            "--matrices", "C3x2", "--out", str(tmp_path),
        ])

        table = pd.read_csv(tmp_path / "f1_desk.csv", dtype=str)
        assert code == EXIT_OK
        assert (tmp_path / "f1_desk_raw.csv").exists()
        assert list(table.columns) == ["N", "M", "N_p", "eps_rel_p", "N_H", "eps_rel_h", "N_H/N_p"]
        assert "N_H/N_p" in capsys.readouterr().out
