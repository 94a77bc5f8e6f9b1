"""
Tests for run configuration loading and overrides.
"""
import json

import pytest

from tcups.config import (
    DEFAULT_DELAYS,
    ENV_OUTPUT_DIR,
    ENV_SEED,
    RunConfig,
    build_config,
    load_config,
)
from tcups.errors import ConfigError
from tcups.physics import DIAMOND


def test_defaults():
    """Test that an empty config resolves to the diamond run."""
    config = build_config()
    assert config.material == DIAMOND
    assert config.excitation.delays_ps == DEFAULT_DELAYS
    assert len(config.excitation.delays_ps) == 10
    assert config.excitation.delays_ps[0] == pytest.approx(0.4)
    assert config.excitation.delays_ps[-1] == pytest.approx(4.0)
    assert config.excitation.pump_wavelength_nm == 788.0
    assert config.instrument.grating == 1800
    assert config.raman_line is None
    assert config.output_dir == "tcups_output"
    assert config.seed == 2008


def test_env_overrides_file(monkeypatch, tmp_path):
    """Test that TCUPS_OUTPUT_DIR and TCUPS_SEED override the config file."""
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "env"))
    monkeypatch.setenv(ENV_SEED, "17")
    config = build_config({"output_dir": "from_file", "ensemble": {"seed": 3}})
    assert config.output_dir == str(tmp_path / "env")
    assert config.ensemble.seed == 17
    assert config.instrument.seed == 17


def test_cli_overrides_env(monkeypatch, tmp_path):
    """Test that explicit arguments win over the environment."""
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "env"))
    monkeypatch.setenv(ENV_SEED, "17")
    config = build_config({}, output_dir=str(tmp_path / "cli"), seed=5, shots=12)
    assert config.output_dir == str(tmp_path / "cli")
    assert config.ensemble.seed == 5
    assert config.instrument.seed == 5
    assert config.ensemble.shots == 12


def test_bad_env_seed(monkeypatch):
    """Test that a non-integer TCUPS_SEED is a config error."""
    monkeypatch.setenv(ENV_SEED, "abc")
    with pytest.raises(ConfigError, match="TCUPS_SEED"):
        build_config()


def test_unknown_key_rejected():
    """Test that unknown keys are reported with their field path."""
    with pytest.raises(ConfigError, match=r"excitation\.pulse_count"):
        build_config({"excitation": {"pulse_count": 3}})


def test_delays_must_increase():
    """Test the delay grid validation."""
    with pytest.raises(ConfigError, match="strictly increasing"):
        build_config({"excitation": {"delays_ps": [0.4, 0.4, 1.0]}})
    with pytest.raises(ConfigError, match="positive"):
        build_config({"excitation": {"delays_ps": [0.0, 1.0]}})
    with pytest.raises(ConfigError, match="empty"):
        build_config({"excitation": {"delays_ps": []}})


def test_non_object_config():
    """Test that a JSON array is not a config."""
    with pytest.raises(ConfigError, match="JSON object"):
        build_config([1, 2, 3])


def test_load_config_syntax_error(tmp_path):
    """Test that JSON syntax errors carry the file, line and column."""
    path = tmp_path / "bad.json"
    path.write_text('{\n  "excitation": {"delays_ps": [0.4,]}\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError, match=r"bad\.json:2:\d+:"):
        load_config(path)


def test_load_config_file(tmp_path):
    """Test loading a config file with a Raman line."""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "excitation": {"delays_ps": [0.4, 0.8, 1.6]},
        "instrument": {"noise": "off"},
        "raman_line": {},
    }), encoding="utf-8")
    config = load_config(path, output_dir=str(tmp_path / "out"))
    assert config.excitation.delays_ps == [0.4, 0.8, 1.6]
    assert config.raman_line is not None
    assert config.raman_line.span_cm_inv == 40.0
    assert config.output_dir == str(tmp_path / "out")


def test_missing_config_file(tmp_path):
    """Test that a missing file is an I/O error, not a config error."""
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.json")


def test_config_hash_stable(exact_config_data):
    """Test that the hash depends on the resolved values only."""
    first = build_config(exact_config_data)
    reordered = dict(reversed(list(exact_config_data.items())))
    second = build_config(reordered)
    assert first.config_hash() == second.config_hash()
    assert len(first.config_hash()) == 64
    assert build_config(exact_config_data, seed=1).config_hash() != first.config_hash()


def test_canonical_json_round_trip(exact_config):
    """Test that the canonical JSON validates back to the same config."""
    data = json.loads(exact_config.canonical_json())
    assert RunConfig.model_validate(data) == exact_config
    assert exact_config.canonical_json() == json.dumps(data, sort_keys=True, separators=(",", ":"))


def test_at_delay(exact_config):
    """Test the per-delay excitation derived from the plan."""
    excitation = exact_config.excitation.at_delay(1.3)
    assert excitation.delay_ps == 1.3
    assert excitation.pulse_energy_pj == exact_config.excitation.pulse_energy_pj
    assert exact_config.excitation.at_delay(0.51, 12.0).pulse_energy_pj == 12.0
