"""
Tests for the stochastic photon-phonon Langevin model.
"""
import math

import numpy as np
import pytest

from tcups.errors import StepSizeError
from tcups.models import (
    CorrelationResult,
    LangevinParams,
    ModeState,
    decay_rate_check,
    integrate_langevin,
    norm_preservation_check,
    perturbative_ops,
    population_decay,
    vacuum_state,
)

GAMMA = 1 / 6.8


def test_default_step():
    """Test that the default step resolves the pump and the decay time."""
    params = LangevinParams()
    assert params.step == pytest.approx(0.005)
    params.check_step()


def test_step_too_coarse():
    """Test that a step longer than τ_pump/20 is rejected."""
    params = LangevinParams(dt=0.02)
    with pytest.raises(StepSizeError):
        params.check_step()
    with pytest.raises(StepSizeError):
        integrate_langevin(params, 1.0)


def test_regime_warnings():
    """Test the weak and transient regime flags."""
    assert LangevinParams().regime_warnings() == []
    warnings = LangevinParams(coupling=5.0, pump_duration=1.0, gamma=0.5).regime_warnings()
    assert len(warnings) == 2
    assert warnings[0].startswith("not weak")
    assert warnings[1].startswith("not transient")


def test_mode_state_rejects_non_finite():
    """Test that diverged amplitudes are refused."""
    with pytest.raises(ValueError):
        ModeState(a=np.array([np.nan + 0j]), b=np.array([0j]))


def test_vacuum_state_norms():
    """Test the unit vacuum norm and the thermal phonon norm 2N_B + 1."""
    params = LangevinParams(thermal_occupation=0.5)
    state = vacuum_state(params, np.random.default_rng(1), 40000)

    assert state.stokes_norm == pytest.approx(1.0, abs=0.03)
    assert state.phonon_norm == pytest.approx(2.0, abs=0.06)


def test_perturbative_ops():
    """Test the lowest-order correlation and Stokes numbers."""
    params = LangevinParams(coupling=0.1, pump_duration=0.1)
    result = perturbative_ops(params, 6.8)

    assert result.n1 == result.n2 == pytest.approx(1e-4)
    assert result.corr.real == pytest.approx(1e-4 * math.exp(-1.0))
    assert result.corr.imag == 0.0
    assert perturbative_ops(params, 0.0, thermal_occupation=1.0).corr.real == pytest.approx(2e-4)
    with pytest.raises(ValueError):
        perturbative_ops(params, -1.0)


def test_correlation_bound():
    """Test the Cauchy-Schwarz check with its noise allowance."""
    assert CorrelationResult(1.0, 1.0 + 0j, 1.0, 1.0, 0.0).satisfies_bound()
    assert not CorrelationResult(1.0, 2.0 + 0j, 1.0, 1.0, 0.1).satisfies_bound()
    assert CorrelationResult(1.0, 1.2 + 0j, 1.0, 1.0, 0.1).satisfies_bound()


def test_zero_coupling_gives_zero_correlation():
    """Test that antithetic sampling cancels the vacuum term exactly without coupling."""
    params = LangevinParams(coupling=0.0, trajectories=500)
    result = integrate_langevin(params, 1.0)

    assert result.corr == 0
    assert result.n1 == 0.0
    assert result.n2 == 0.0
    assert result.stderr == 0.0


def test_no_dephasing_correlation_independent_of_delay():
    """Test that without decay every non-overlapping delay sees the same correlation."""
    params = LangevinParams(gamma=0.0, trajectories=500)
    values = [integrate_langevin(params, delay).corr for delay in (0.1, 0.25, 1.0)]

    assert values[0] == values[1] == values[2]


def test_integrate_independent_of_workers(langevin_params):
    """Test that the trajectory average does not depend on the worker count."""
    params = langevin_params.model_copy(update={"trajectories": 2500})
    serial = integrate_langevin(params, 0.5, workers=1)
    parallel = integrate_langevin(params, 0.5, workers=3)

    assert serial.corr == parallel.corr
    assert serial.stderr == parallel.stderr


def test_integrate_rejects_negative_delay(langevin_params):
    """Test that a negative delay is rejected."""
    with pytest.raises(ValueError):
        integrate_langevin(langevin_params, -0.1)


@pytest.mark.slow
@pytest.mark.parametrize("coupling", [0.03, 0.1, 0.3])
@pytest.mark.parametrize("gamma_delay", [0.0, 0.5, 1.0])
def test_integrate_matches_perturbative(coupling, gamma_delay):
    """Test the stochastic correlation against g²τ²(N_B + 1)e^{-Γτ} for gτ of 0.003, 0.01 and 0.03."""
    params = LangevinParams(coupling=coupling, pump_duration=0.1, trajectories=10_000)
    delay = gamma_delay / GAMMA
    numeric = integrate_langevin(params, delay, stream=3)
    analytic = perturbative_ops(params, delay)

    assert numeric.trajectories == 10_000
    assert abs(numeric.corr - analytic.corr) <= 3 * numeric.stderr
    assert numeric.n1 == pytest.approx(analytic.n1, rel=0.15)
    assert numeric.satisfies_bound()


def test_norm_check_requires_free_decay(langevin_params):
    """Test that the norm check refuses a pumped system."""
    with pytest.raises(ValueError):
        norm_preservation_check(langevin_params, 6.8)


def test_norm_preserved_with_noise():
    """Test that Langevin noise holds ⟨|b|²⟩ at the vacuum norm."""
    params = LangevinParams(coupling=0.0, trajectories=4000)
    report = norm_preservation_check(params, 2.0 / GAMMA, samples=10)

    assert report.noise
    assert report.second_moment[-1] == pytest.approx(1.0, abs=0.08)
    np.testing.assert_array_equal(report.expected, 1.0)


def test_norm_decays_without_noise():
    """Test that dropping the noise lets the second moment decay as e^{-2Γt}."""
    params = LangevinParams(coupling=0.0, trajectories=2000)
    report = norm_preservation_check(params, 2.0 / GAMMA, samples=10, noise=False)
    ratio = report.second_moment[-1] / report.second_moment[0]

    assert ratio == pytest.approx(math.exp(-2 * GAMMA * report.times[-1]), rel=0.01)
    assert report.max_deviation_sigma < 1e-6
    assert report.drift_slope < 0


def test_population_decay_starts_at_initial_occupation():
    """Test the excess phonon number of the displaced state."""
    params = LangevinParams(coupling=0.0, trajectories=2000)
    times, excess, stderr = population_decay(params, initial_occupation=50.0, samples=10)

    assert times[0] == 0.0
    assert excess[0] == pytest.approx(50.0, rel=0.03)
    assert excess[-1] == pytest.approx(50.0 * math.exp(-2 * GAMMA * times[-1]), rel=0.1)
    assert np.all(stderr > 0)


def test_population_decay_needs_dephasing():
    """Test that a zero rate has no population decay to measure."""
    with pytest.raises(ValueError):
        population_decay(LangevinParams(gamma=0.0))


@pytest.mark.slow
def test_population_decays_twice_as_fast(langevin_params):
    """Test that the phonon number decays at 2Γ while the correlation decays at Γ."""
    params = langevin_params.model_copy(update={"trajectories": 10_000})
    report = decay_rate_check(params, [0.5 / GAMMA, 1.0 / GAMMA, 2.0 / GAMMA])

    assert report.amplitude_rate == pytest.approx(GAMMA, rel=0.05)
    assert report.population_rate == pytest.approx(2 * GAMMA, rel=0.05)
    assert report.ratio == pytest.approx(2.0, rel=0.05)


def test_decay_rate_check_needs_three_delays(langevin_params):
    """Test that two delays cannot constrain the decay."""
    with pytest.raises(ValueError):
        decay_rate_check(langevin_params, [1.0, 2.0])
