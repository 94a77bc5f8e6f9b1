"""
Tests for the command line entry point.
"""
import json

import pytest

from tcups.cli import EXIT_ANALYSIS, EXIT_IO, EXIT_OK, EXIT_VALIDATION, main


@pytest.fixture
def config_file(tmp_path, exact_config_data):
    """Noise-free five-delay config written to disk."""
    path = tmp_path / "run.json"
    data = dict(exact_config_data)
    data.pop("output_dir")
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_constants(capsys):
    """Test that the constants table is printed as markdown."""
    assert main(["constants"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("|")
    assert "| raman_shift | 1332 | cm^-1 |" in out


def test_schema_stdout(capsys):
    """Test that all report schemas are printed."""
    assert main(["schema"]) == EXIT_OK
    schemas = json.loads(capsys.readouterr().out)
    assert set(schemas) == {"analysis", "quantum", "power_scan", "manifest"}


def test_schema_files(tmp_path):
    """Test that schema --out writes one file per report."""
    assert main(["schema", "--out", str(tmp_path / "schemas")]) == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "schemas").iterdir())
    assert names == [
        "analysis.schema.json",
        "manifest.schema.json",
        "power_scan.schema.json",
        "quantum.schema.json",
    ]


def test_simulate_then_analyze(config_file, tmp_path, capsys):
    """Test the simulate and analyze commands end to end with JSON output."""
    out = tmp_path / "spectra"
    code = main(["simulate", "--config", str(config_file), "--out", str(out), "--json-only", "--workers", "2"])
    assert code == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["success"]
    assert len(result["manifest"]["files"]) == 5

    code = main(["analyze", str(out), "--json-only", "--fix-v0", "--method", "direct"])
    assert code == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["report"]["method"] == "direct"
    assert result["report"]["v0"] == 1.0


def test_simulate_seed_flag(config_file, tmp_path, capsys):
    """Test that --seed reaches the manifest."""
    code = main(["simulate", "--config", str(config_file), "--out", str(tmp_path / "s"), "--seed", "11", "--json-only"])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["manifest"]["seed"] == 11


def test_human_readable_summary(config_file, tmp_path, capsys):
    """Test the colored summary when --json-only is not given."""
    assert main(["simulate", "--config", str(config_file), "--out", str(tmp_path / "s")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "✓ simulate finished" in out
    assert "Wrote 10 spectra" in out


def test_invalid_config_exit_code(tmp_path, capsys):
    """Test that schema violations exit with the validation code."""
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"excitation": {"delays_ps": [2.0, 1.0]}}), encoding="utf-8")
    assert main(["simulate", "--config", str(path), "--json-only"]) == EXIT_VALIDATION
    result = json.loads(capsys.readouterr().out)
    assert result["error_kind"] == "validation"
    assert "strictly increasing" in result["error"]


def test_missing_config_exit_code(tmp_path, capsys):
    """Test that an unreadable config exits with the I/O code."""
    assert main(["simulate", "--config", str(tmp_path / "absent.json"), "--json-only"]) == EXIT_IO


def test_analyze_empty_exit_code(tmp_path, capsys):
    """Test that analyzing a directory without spectra exits with the analysis code."""
    assert main(["analyze", str(tmp_path), "--json-only"]) == EXIT_ANALYSIS
    result = json.loads(capsys.readouterr().out)
    assert not result["success"]


def test_analyze_failure_summary(tmp_path, capsys):
    """Test the failure line of the colored summary."""
    assert main(["analyze", str(tmp_path)]) == EXIT_ANALYSIS
    assert "✗ analyze failed" in capsys.readouterr().out


def test_quantum_check_flags(tmp_path, capsys):
    """Test quantum-check with flag overrides and a report file."""
    out = tmp_path / "quantum.json"
    code = main([
        "quantum-check", "--coupling", "0", "--trajectories", "50", "--seed", "3",
        "--out", str(out), "--json-only",
    ])
    assert code == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["report"]["params"]["seed"] == 3
    assert result["report"]["all_within_3sigma"]
    assert json.loads(out.read_text(encoding="utf-8")) == result["report"]


def test_quantum_check_invalid_params(capsys):
    """Test that invalid Langevin parameters exit with the validation code."""
    assert main(["quantum-check", "--trajectories", "0", "--json-only"]) == EXIT_VALIDATION


def test_power_scan_range_exit_code(tmp_path, capsys):
    """Test that a narrow power scan exits with the validation code."""
    path = tmp_path / "scan.json"
    path.write_text(json.dumps({"excitation": {"energies_pj": [1.0, 2.0, 3.0, 4.0]}}), encoding="utf-8")
    assert main(["power-scan", "--config", str(path), "--json-only"]) == EXIT_VALIDATION


def test_missing_command():
    """Test that a command is required."""
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2
