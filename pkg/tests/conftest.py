"""
Test configuration and fixtures for the tcups package.
"""
import os
from typing import Any, Dict

import hypothesis
import numpy as np
import pytest

from tcups.config import ENV_OUTPUT_DIR, ENV_SEED, RunConfig, build_config
from tcups.instrument.detector import InstrumentModel
from tcups.models.classical import ExcitationConfig, ShotEnsemble
from tcups.models.quantum import LangevinParams
from tcups.physics import DIAMOND, MaterialParams

np.seterr(all="warn")

hypothesis.settings.register_profile("tcups", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "tcups"))

SMALL_DELAYS = [0.4, 1.3, 2.2, 3.1, 4.0]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch) -> None:
    """Keep the caller's TCUPS_* variables out of every test."""
    monkeypatch.delenv(ENV_OUTPUT_DIR, raising=False)
    monkeypatch.delenv(ENV_SEED, raising=False)


@pytest.fixture
def diamond() -> MaterialParams:
    """Bulk diamond, 1/Γ = 6.8 ps."""
    return DIAMOND


@pytest.fixture
def excitation() -> ExcitationConfig:
    """788 nm, 80 fs pump pair at 2 ps."""
    return ExcitationConfig(delay_ps=2.0)


@pytest.fixture
def exact_ensemble() -> ShotEnsemble:
    """Ensemble whose phasor is exactly exp(-Γτ)."""
    return ShotEnsemble(shots=1, phase_model="direct_exponential")


@pytest.fixture
def quiet_instrument() -> InstrumentModel:
    """1800 lines/mm grating with counting noise off."""
    return InstrumentModel(noise="off")


@pytest.fixture
def exact_config_data(tmp_path) -> Dict[str, Any]:
    """Config mapping for a noise-free five-delay scan."""
    return {
        "excitation": {"delays_ps": list(SMALL_DELAYS)},
        "ensemble": {"shots": 1, "phase_model": "direct_exponential"},
        "instrument": {"noise": "off"},
        "output_dir": str(tmp_path / "spectra"),
    }


@pytest.fixture
def exact_config(exact_config_data) -> RunConfig:
    """Noise-free five-delay scan writing under tmp_path."""
    return build_config(exact_config_data)


@pytest.fixture
def noisy_config(tmp_path) -> RunConfig:
    """Five-delay scan with Cauchy phases, Poisson counting and a Raman line."""
    return build_config({
        "excitation": {"delays_ps": list(SMALL_DELAYS)},
        "ensemble": {"shots": 4000},
        "raman_line": {},
        "output_dir": str(tmp_path / "noisy"),
    })


@pytest.fixture
def langevin_params() -> LangevinParams:
    """Weak, transient pumping with a modest trajectory count."""
    return LangevinParams(coupling=0.1, pump_duration=0.1, trajectories=3000)
