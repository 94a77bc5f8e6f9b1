"""
Classical pulse-pair spectra and the photon-phonon Langevin model.
"""
from .classical import (
    AxisKind,
    ExcitationConfig,
    PhaseModel,
    PulsePair,
    ShotEnsemble,
    Spectrum,
    apply_alignment,
    averaged_spectrum,
    ensemble_phasor,
    frequency_grid,
    pair_spectrum,
    plan_grid,
    raman_line,
    sample_phases,
    single_pulse_spectrum,
    transform_limited_bandwidth,
)
from .quantum import (
    CorrelationResult,
    LangevinParams,
    ModeState,
    NormReport,
    RateReport,
    decay_rate_check,
    integrate_langevin,
    norm_preservation_check,
    perturbative_ops,
    population_decay,
    vacuum_state,
)

__all__ = [
    'AxisKind',
    'ExcitationConfig',
    'PhaseModel',
    'PulsePair',
    'ShotEnsemble',
    'Spectrum',
    'apply_alignment',
    'averaged_spectrum',
    'ensemble_phasor',
    'frequency_grid',
    'pair_spectrum',
    'plan_grid',
    'raman_line',
    'sample_phases',
    'single_pulse_spectrum',
    'transform_limited_bandwidth',
    'CorrelationResult',
    'LangevinParams',
    'ModeState',
    'NormReport',
    'RateReport',
    'decay_rate_check',
    'integrate_langevin',
    'norm_preservation_check',
    'perturbative_ops',
    'population_decay',
    'vacuum_state',
]
