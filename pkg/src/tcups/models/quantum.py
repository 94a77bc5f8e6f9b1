"""
Photon-phonon Langevin model of the two-pulse Raman experiment.

Equations of motion for the Stokes mode A and the phonon mode B, with the
pump coupling g switched on as a rectangular step of length τ_pump:

    dA/dt = -i g B†
    dB/dt = -i g A† - Γ B + F†

Operators are replaced by c-numbers with unit second moment in vacuum
(⟨|a|²⟩ = ⟨|b|²⟩ = 1). That is the symmetric-ordering representation scaled
by two, so normally ordered quantities are recovered as

    ⟨A1† A2⟩ = ⟨a1* a2⟩ / 2,        ⟨A† A⟩ = (⟨|a|²⟩ - 1) / 2.

F is complex white noise of strength 2Γ(2N_B + 1), which keeps the thermal
(or vacuum) phonon state stationary during free decay.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from ..errors import StepSizeError
from ..utils.runner import run_blocks
from ..utils.streams import Domain, block_slices, substream

logger = logging.getLogger(__name__)

WEAK_THRESHOLD = 0.1
TRANSIENT_THRESHOLD = 0.1
STEPS_PER_SCALE = 20

# Stream indices inside Domain.LANGEVIN
_CORRELATION_STREAM = 0
_NORM_STREAM = 1_000_000
_POPULATION_STREAM = 2_000_000


class LangevinParams(BaseModel):
    """Parameters of the stochastic c-number integration."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    coupling: float = Field(0.1, ge=0, description="Pump-on Raman coupling g (ps^-1)")
    pump_duration: float = Field(0.1, gt=0, description="Pump step length τ_pump (ps)")
    gamma: float = Field(1.0 / 6.8, ge=0, description="Phonon dephasing rate Γ (ps^-1)")
    dt: Optional[float] = Field(None, gt=0, description="Integrator step (ps); default min(τ_pump, 1/Γ)/20")
    trajectories: int = Field(10_000, ge=1, description="Independent trajectories")
    seed: int = Field(2008, ge=0, lt=2 ** 64, description="Seed of the noise streams")
    thermal_occupation: float = Field(0.0, ge=0, description="Initial phonon occupation N_B(0)")
    antithetic: bool = Field(True, description="Average sign-flipped Stokes vacuum copies")

    @property
    def step(self) -> float:
        if self.dt is not None:
            return self.dt
        scales = [self.pump_duration]
        if self.gamma > 0:
            scales.append(1.0 / self.gamma)
        return min(scales) / STEPS_PER_SCALE

    @property
    def vacuum_norm(self) -> float:
        """Stationary ⟨|b|²⟩ in the unit-norm convention."""
        return 2.0 * self.thermal_occupation + 1.0

    def check_step(self) -> None:
        """Raise StepSizeError unless dt resolves τ_pump and 1/Γ."""
        limit = self.pump_duration / STEPS_PER_SCALE
        if self.gamma > 0:
            limit = min(limit, 1.0 / (self.gamma * STEPS_PER_SCALE))
        if self.step > limit * (1 + 1e-12):
            raise StepSizeError(
                f"dt={self.step:g} ps exceeds min(τ_pump, 1/Γ)/{STEPS_PER_SCALE} = {limit:g} ps"
            )

    def regime_warnings(self) -> List[str]:
        warnings = []
        weak = self.coupling * self.pump_duration
        transient = self.gamma * self.pump_duration
        if weak > WEAK_THRESHOLD:
            warnings.append(f"not weak: g·τ_pump = {weak:.3g} > {WEAK_THRESHOLD}")
        if transient > TRANSIENT_THRESHOLD:
            warnings.append(f"not transient: Γ·τ_pump = {transient:.3g} > {TRANSIENT_THRESHOLD}")
        return warnings


@dataclass(frozen=True)
class ModeState:
    """Ensemble of c-number amplitudes: Stokes mode a, phonon mode b, at time t (ps)."""
    a: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("mode amplitudes must be finite")

    @property
    def stokes_norm(self) -> float:
        return float(np.mean(np.abs(self.a) ** 2))

    @property
    def phonon_norm(self) -> float:
        return float(np.mean(np.abs(self.b) ** 2))


@dataclass(frozen=True)
class CorrelationResult:
    """First-order correlation of the two Stokes modes at one pulse delay."""
    delay: float
    corr: complex
    n1: float
    n2: float
    stderr: float
    trajectories: int = 0
    warnings: Tuple[str, ...] = ()

    def satisfies_bound(self, sigmas: float = 3.0) -> bool:
        """Cauchy-Schwarz |⟨A1†A2⟩| ≤ sqrt(n1·n2) with a noise allowance."""
        return abs(self.corr) <= math.sqrt(max(self.n1, 0.0) * max(self.n2, 0.0)) + sigmas * self.stderr

    def to_dict(self) -> dict:
        return {
            "delay_ps": self.delay,
            "corr_re": self.corr.real,
            "corr_im": self.corr.imag,
            "corr_abs": abs(self.corr),
            "n1": self.n1,
            "n2": self.n2,
            "stderr": self.stderr,
            "trajectories": self.trajectories,
        }


@dataclass(frozen=True)
class NormReport:
    """Free-decay second moment ⟨|b|²⟩ against the stationary norm."""
    times: np.ndarray
    second_moment: np.ndarray
    stderr: np.ndarray
    expected: np.ndarray
    drift_slope: float
    drift_stderr: float
    max_deviation_sigma: float
    noise: bool

    @property
    def preserved(self) -> bool:
        return self.max_deviation_sigma <= 3.0


@dataclass(frozen=True)
class RateReport:
    """Amplitude (correlation) and population decay rates."""
    amplitude_rate: float
    amplitude_stderr: float
    population_rate: float
    population_stderr: float
    delays: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def ratio(self) -> float:
        return self.population_rate / self.amplitude_rate


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Complex Gaussian samples with ⟨|z|²⟩ = 1."""
    z = rng.standard_normal((2, size))
    return (z[0] + 1j * z[1]) / math.sqrt(2.0)


def vacuum_state(
    params: LangevinParams,
    rng: np.random.Generator,
    size: int,
    displacement: float = 0.0
) -> ModeState:
    """Stokes vacuum and (displaced) thermal phonon amplitudes at t = 0."""
    a = _complex_normal(rng, size)
    b = displacement + math.sqrt(params.vacuum_norm) * _complex_normal(rng, size)
    return ModeState(a=a, b=b)


def perturbative_ops(
    params: LangevinParams,
    delay: float,
    thermal_occupation: Optional[float] = None
) -> CorrelationResult:
    """
    Lowest-order analytic result in the weak, transient limit.

    n1 = n2 = g²τ_pump²(N_B + 1) and ⟨A1†A2⟩ = g²τ_pump²(N_B + 1) e^{-Γτ}.
    """
    if delay < 0:
        raise ValueError(f"delay must be non-negative, got {delay}")
    occupation = params.thermal_occupation if thermal_occupation is None else thermal_occupation
    amplitude = (params.coupling * params.pump_duration) ** 2 * (occupation + 1.0)
    return CorrelationResult(
        delay=delay,
        corr=complex(amplitude * math.exp(-params.gamma * delay)),
        n1=amplitude,
        n2=amplitude,
        stderr=0.0,
        trajectories=0,
        warnings=tuple(params.regime_warnings()),
    )


def _segments(pump_steps: int, onset: int) -> List[Tuple[int, bool, bool]]:
    """Split the run into spans of constant (pump 1 on, pump 2 on)."""
    edges = sorted({0, pump_steps, onset, onset + pump_steps})
    spans = []
    for start, stop in zip(edges[:-1], edges[1:]):
        if stop > start:
            spans.append((stop - start, start < pump_steps, onset <= start < onset + pump_steps))
    return spans


def _correlation_block(
    params: LangevinParams,
    delay: float,
    stream: int,
    block: Tuple[int, int]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    index, size = block
    rng = substream(params.seed, Domain.LANGEVIN, stream, index)
    h = params.step
    g = params.coupling
    gamma = params.gamma
    pump_steps = max(1, int(round(params.pump_duration / h)))
    h = params.pump_duration / pump_steps
    onset = int(round(delay / h))
    diffusion = math.sqrt(2.0 * gamma * params.vacuum_norm * h)

    if params.antithetic:
        s1 = np.array([1.0, -1.0, 1.0, -1.0])[:, None]
        s2 = np.array([1.0, 1.0, -1.0, -1.0])[:, None]
    else:
        s1 = np.ones((1, 1))
        s2 = np.ones((1, 1))

    initial = vacuum_state(params, rng, size)
    a10 = initial.a
    a20 = _complex_normal(rng, size)
    b0 = initial.b
    a1 = s1 * a10
    a2 = s2 * a20
    b = np.broadcast_to(b0, a1.shape).copy()

    for steps, pump1, pump2 in _segments(pump_steps, onset):
        g1 = g if pump1 else 0.0
        g2 = g if pump2 else 0.0
        for _ in range(steps):
            kick = diffusion * _complex_normal(rng, size) if diffusion > 0 else 0.0
            drive = -1j * (g1 * np.conj(a1) + g2 * np.conj(a2))
            b_next = b + (drive - gamma * b) * h + kick
            # Trapezoidal coupling keeps overlapping pump windows unbiased at O(g²)
            b_mid = np.conj(0.5 * (b + b_next))
            if g1:
                a1 = a1 - 1j * g1 * b_mid * h
            if g2:
                a2 = a2 - 1j * g2 * b_mid * h
            b = b_next

    corr = 0.5 * np.mean(np.conj(a1) * a2, axis=0)
    n1 = 0.5 * np.mean(np.abs(a1) ** 2 - np.abs(a10) ** 2, axis=0)
    n2 = 0.5 * np.mean(np.abs(a2) ** 2 - np.abs(a20) ** 2, axis=0)
    return corr, n1, n2


def _complex_stderr(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    variance = np.var(samples.real, ddof=1) + np.var(samples.imag, ddof=1)
    return float(math.sqrt(variance / samples.size))


def integrate_langevin(
    params: LangevinParams,
    delay: float,
    stream: int = 0,
    workers: int = 1
) -> CorrelationResult:
    """
    Simulate the two-pulse protocol trajectory by trajectory.

    Pump 1 couples the first Stokes mode to the phonon on [0, τ_pump); pump 2
    couples the second Stokes mode on [delay, delay + τ_pump). Between and
    during the pumps the phonon decays at Γ under Langevin noise. The
    trajectory average of a1* a2 estimates ⟨A1†A2⟩.

    Args:
        params: Coupling, pump length, dephasing rate, step and sampling settings
        delay: Pulse separation (ps); windows may overlap for delay < τ_pump
        stream: Stream index so different delays draw independent noise
        workers: Concurrency limit for trajectory blocks

    Raises:
        StepSizeError: if dt does not resolve τ_pump and 1/Γ
    """
    if delay < 0:
        raise ValueError(f"delay must be non-negative, got {delay}")
    params.check_step()
    warnings = params.regime_warnings()
    for message in warnings:
        logger.warning(f"Langevin regime: {message}")

    blocks = list(block_slices(params.trajectories))
    results = run_blocks(
        lambda block: _correlation_block(params, delay, _CORRELATION_STREAM + stream, block),
        blocks,
        workers,
    )
    corr = np.concatenate([r[0] for r in results])
    n1 = np.concatenate([r[1] for r in results])
    n2 = np.concatenate([r[2] for r in results])
    return CorrelationResult(
        delay=delay,
        corr=complex(corr.mean()),
        n1=float(n1.mean()),
        n2=float(n2.mean()),
        stderr=_complex_stderr(corr),
        trajectories=params.trajectories,
        warnings=tuple(warnings),
    )


def _free_decay_block(
    params: LangevinParams,
    stream: int,
    sample_every: int,
    samples: int,
    noise: bool,
    displacement: float,
    block: Tuple[int, int]
) -> np.ndarray:
    index, size = block
    rng = substream(params.seed, Domain.LANGEVIN, stream, index)
    h = params.step
    diffusion = math.sqrt(2.0 * params.gamma * params.vacuum_norm * h) if noise else 0.0
    b = vacuum_state(params, rng, size, displacement).b
    moments = np.empty((samples + 1, size))
    moments[0] = np.abs(b) ** 2
    for sample in range(1, samples + 1):
        for _ in range(sample_every):
            b = b * (1.0 - params.gamma * h)
            if diffusion > 0:
                b = b + diffusion * _complex_normal(rng, size)
        moments[sample] = np.abs(b) ** 2
    return moments


def _free_decay(
    params: LangevinParams,
    horizon: float,
    samples: int,
    noise: bool,
    displacement: float,
    stream: int,
    workers: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = params.step
    sample_every = max(1, int(round(horizon / (samples * h))))
    blocks = list(block_slices(params.trajectories))
    results = run_blocks(
        lambda block: _free_decay_block(params, stream, sample_every, samples, noise, displacement, block),
        blocks,
        workers,
    )
    moments = np.concatenate(results, axis=1)
    times = h * sample_every * np.arange(samples + 1)
    stderr = moments.std(axis=1, ddof=1) / math.sqrt(moments.shape[1]) if moments.shape[1] > 1 else np.zeros(samples + 1)
    return times, moments.mean(axis=1), stderr


def norm_preservation_check(
    params: LangevinParams,
    horizon: float,
    samples: int = 50,
    noise: bool = True,
    workers: int = 1
) -> NormReport:
    """
    Verify that free decay with Langevin noise keeps ⟨|b|²⟩ at its stationary norm.

    With ``noise=False`` the second moment decays as e^{-2Γt}, which is what
    the noise term is there to prevent.
    """
    if params.coupling != 0:
        raise ValueError("norm_preservation_check needs coupling = 0 (free phonon decay)")
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    params.check_step()
    times, moment, stderr = _free_decay(params, horizon, samples, noise, 0.0, _NORM_STREAM, workers)
    if noise:
        expected = np.full_like(moment, params.vacuum_norm)
    else:
        expected = moment[0] * (1.0 - params.gamma * params.step) ** (2.0 * np.round(times / params.step))
    with np.errstate(divide="ignore", invalid="ignore"):
        deviation = np.where(stderr > 0, np.abs(moment - expected) / stderr, np.where(moment == expected, 0.0, np.inf))
    slope = stats.linregress(times, moment) if np.ptp(moment) > 0 else None
    report = NormReport(
        times=times,
        second_moment=moment,
        stderr=stderr,
        expected=expected,
        drift_slope=float(slope.slope) if slope is not None else 0.0,
        drift_stderr=float(slope.stderr) if slope is not None else 0.0,
        max_deviation_sigma=float(np.max(deviation)),
        noise=noise,
    )
    logger.info(
        f"Norm check over {horizon:g} ps: ⟨|b|²⟩(end)={moment[-1]:.4f}, drift {report.drift_slope:.3g}/ps, "
        f"max deviation {report.max_deviation_sigma:.2f}σ"
    )
    return report


def population_decay(
    params: LangevinParams,
    initial_occupation: float = 50.0,
    horizon: Optional[float] = None,
    samples: int = 20,
    workers: int = 1
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Excess phonon number of a displaced phonon state during free decay.

    Returns:
        (times, excess occupation n(t), stderr), with n(0) ≈ initial_occupation
    """
    if params.gamma <= 0:
        raise ValueError("population decay needs gamma > 0")
    horizon = horizon if horizon is not None else 1.0 / params.gamma
    params.check_step()
    displacement = math.sqrt(2.0 * initial_occupation)
    times, moment, stderr = _free_decay(params, horizon, samples, True, displacement, _POPULATION_STREAM, workers)
    return times, 0.5 * (moment - params.vacuum_norm), 0.5 * stderr


def decay_rate_check(
    params: LangevinParams,
    delays: Sequence[float],
    initial_occupation: float = 50.0,
    workers: int = 1
) -> RateReport:
    """
    Compare the decay rate of the two-pulse correlation with that of the phonon number.

    The correlation ⟨A1†A2⟩ decays at Γ; the population N_B at 2Γ.
    """
    from ..analysis.fitting import fit_exponential  # analysis imports models

    if len(delays) < 3:
        raise ValueError("need at least three delays to fit the correlation decay")
    results = [integrate_langevin(params, d, stream=i, workers=workers) for i, d in enumerate(delays)]
    amplitude = fit_exponential(
        np.array([r.delay for r in results]),
        np.array([abs(r.corr) for r in results]),
        np.array([r.stderr for r in results]),
    )
    horizon = max(delays) if max(delays) > 0 else 1.0 / params.gamma
    times, excess, stderr = population_decay(params, initial_occupation, horizon, workers=workers)
    population = fit_exponential(times, excess, stderr)
    report = RateReport(
        amplitude_rate=amplitude.rate,
        amplitude_stderr=amplitude.rate_stderr,
        population_rate=population.rate,
        population_stderr=population.rate_stderr,
        delays=tuple(float(d) for d in delays),
    )
    logger.info(
        f"Decay rates: amplitude {report.amplitude_rate:.4f}/ps, population {report.population_rate:.4f}/ps, "
        f"ratio {report.ratio:.3f}"
    )
    return report
