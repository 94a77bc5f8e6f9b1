"""
Run configuration: schema, file loading and environment overrides.

Precedence for the overridable fields is CLI flag > environment > config
file > model default. Only the output directory and the seed can be set from
the environment.
"""
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .instrument.detector import InstrumentModel
from .models.classical import ExcitationConfig, ShotEnsemble
from .physics import DEFAULT_YIELD_CALIBRATION, DIAMOND, MaterialParams

logger = logging.getLogger(__name__)

ENV_OUTPUT_DIR = "TCUPS_OUTPUT_DIR"
ENV_SEED = "TCUPS_SEED"

DEFAULT_DELAYS = [round(float(d), 6) for d in np.linspace(0.4, 4.0, 10)]
DEFAULT_ENERGIES = [1.1, 3.8, 12.0, 38.0, 120.0, 380.0]


class ExcitationPlan(BaseModel):
    """Pump pulses and the delay and energy grids of a run."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    pump_wavelength_nm: float = Field(788.0, gt=0, description="Pump centre wavelength (nm)")
    duration_fs: float = Field(80.0, gt=0, description="Pump pulse duration FWHM (fs)")
    pulse_energy_pj: float = Field(380.0, gt=0, description="Pulse energy for the delay scan (pJ)")
    energies_pj: List[float] = Field(default_factory=lambda: list(DEFAULT_ENERGIES), description="Power scan energies (pJ)")
    delays_ps: List[float] = Field(default_factory=lambda: list(DEFAULT_DELAYS), description="Pulse delays (ps)")
    scan_delay_ps: float = Field(0.51, gt=0, description="Fixed delay of the power scan (ps)")
    alignment_factor: float = Field(1.0, ge=0, le=1, description="External fringe contrast factor")
    laser_attenuation: float = Field(1e-9, gt=0, description="Fraction of pump photons reaching the spectrometer")
    yield_calibration: float = Field(DEFAULT_YIELD_CALIBRATION, gt=0, description="Stokes photons per pJ")

    @field_validator("delays_ps")
    @classmethod
    def _increasing_delays(cls, delays: List[float]) -> List[float]:
        if not delays:
            raise ValueError("delays must not be empty")
        if delays[0] <= 0:
            raise ValueError("delays must be positive")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("delays must be strictly increasing")
        return delays

    @field_validator("energies_pj")
    @classmethod
    def _positive_energies(cls, energies: List[float]) -> List[float]:
        if any(e <= 0 for e in energies):
            raise ValueError("energies must be positive")
        return energies

    def at_delay(self, delay: float, energy: Optional[float] = None) -> ExcitationConfig:
        return ExcitationConfig(
            pump_wavelength_nm=self.pump_wavelength_nm,
            duration_fs=self.duration_fs,
            pulse_energy_pj=self.pulse_energy_pj if energy is None else energy,
            delay_ps=delay,
        )


class RamanLineConfig(BaseModel):
    """Conventional spontaneous Raman spectrum recorded next to the delay scan."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    fwhm_cm_inv: Optional[float] = Field(None, gt=0, description="Line FWHM; default Γ/π of the material")
    span_cm_inv: float = Field(40.0, gt=0, description="Window width around the Raman shift")
    pitch_cm_inv: float = Field(0.05, gt=0, description="Sample pitch")
    peak_counts: float = Field(1e4, gt=0, description="Mean counts at the line centre")
    offset_counts: float = Field(100.0, ge=0, description="Mean background counts")


class RunConfig(BaseModel):
    """Everything a simulate, analyze or power-scan run depends on."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    material: MaterialParams = Field(default_factory=lambda: DIAMOND)
    excitation: ExcitationPlan = Field(default_factory=ExcitationPlan)
    ensemble: ShotEnsemble = Field(default_factory=ShotEnsemble)
    instrument: InstrumentModel = Field(default_factory=InstrumentModel)
    raman_line: Optional[RamanLineConfig] = None
    output_dir: str = Field("tcups_output", min_length=1, description="Directory for spectra and reports")

    @property
    def seed(self) -> int:
        return self.ensemble.seed

    def canonical_json(self) -> str:
        """Sorted, compact JSON of the fully resolved config."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def _format_validation(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def _apply_overrides(
    data: Dict[str, Any],
    output_dir: Optional[str],
    seed: Optional[int],
    shots: Optional[int]
) -> Dict[str, Any]:
    data = dict(data)
    env_dir = os.environ.get(ENV_OUTPUT_DIR)
    env_seed = os.environ.get(ENV_SEED)
    if output_dir is None and env_dir:
        output_dir = env_dir
    if seed is None and env_seed:
        try:
            seed = int(env_seed)
        except ValueError as e:
            raise ConfigError(f"{ENV_SEED}={env_seed!r} is not an integer") from e
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    if seed is not None or shots is not None:
        ensemble = dict(data.get("ensemble") or {})
        if seed is not None:
            ensemble["seed"] = seed
            instrument = dict(data.get("instrument") or {})
            instrument["seed"] = seed
            data["instrument"] = instrument
        if shots is not None:
            ensemble["shots"] = shots
        data["ensemble"] = ensemble
    return data


def build_config(
    data: Optional[Dict[str, Any]] = None,
    output_dir: Optional[str] = None,
    seed: Optional[int] = None,
    shots: Optional[int] = None
) -> RunConfig:
    """
    Validate a config mapping after applying overrides.

    Args:
        data: Parsed config; None for all defaults
        output_dir: CLI output directory
        seed: CLI seed, applied to the phase and counting streams
        shots: CLI shot count

    Raises:
        ConfigError: with one ``field.path: message`` entry per problem
    """
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
    merged = _apply_overrides(data or {}, output_dir, seed, shots)
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {_format_validation(e)}") from e


def load_config(
    path: Optional[Union[str, Path]] = None,
    output_dir: Optional[str] = None,
    seed: Optional[int] = None,
    shots: Optional[int] = None
) -> RunConfig:
    """
    Read, override and validate a JSON run config.

    Raises:
        ConfigError: JSON syntax errors (with line and column) or schema violations
    """
    data = None
    if path is not None:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        logger.info(f"Loaded config from {path}")
    return build_config(data, output_dir, seed, shots)
