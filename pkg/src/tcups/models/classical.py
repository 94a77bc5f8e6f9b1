"""
Fluctuating-phase classical model of the Stokes pulse pair.

Each pump pulse of a delayed pair emits a Stokes pulse; the second one carries
a random relative phase θ left by the dephasing phonon. A single shot shows
full-contrast spectral fringes 2|E1|²(1 + cos(ωτ + θ)); averaging over shots
washes them out to 2|E1|²(1 + e^{-Γτ} cos ωτ).

Spectra live on uniform optical-frequency grids in THz with delays in ps, so
ωτ = 2π·f·τ is dimensionless without further factors.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from ..errors import GridError, SpectrumError
from ..physics import CONSTANTS, MaterialParams, nm_to_thz, stokes_wavelength
from ..utils.runner import run_blocks
from ..utils.streams import Domain, block_slices, substream

logger = logging.getLogger(__name__)

# Intensity time-bandwidth product of a transform-limited Gaussian pulse.
GAUSSIAN_TBP = 2.0 * math.log(2.0) / math.pi

EDGE_TOLERANCE = 1e-3
UNIFORM_TOLERANCE = 1e-9


class AxisKind(str, Enum):
    FREQUENCY = "frequency"
    WAVELENGTH = "wavelength"
    WAVENUMBER = "wavenumber"


@dataclass(frozen=True)
class Spectrum:
    """
    Sampled intensity on a uniform, strictly increasing grid.

    ``grid`` is in THz, nm or cm^-1 depending on ``axis``; ``shots`` records
    how many shots were averaged into the intensity.
    """
    grid: np.ndarray
    intensity: np.ndarray
    axis: AxisKind = AxisKind.FREQUENCY
    shots: int = 1

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        intensity = np.array(self.intensity, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise SpectrumError(f"grid must be 1-D with at least 2 samples, got shape {grid.shape}")
        if intensity.shape != grid.shape:
            raise SpectrumError(f"intensity shape {intensity.shape} does not match grid shape {grid.shape}")
        steps = np.diff(grid)
        if np.any(steps <= 0):
            raise SpectrumError("grid must be strictly increasing")
        pitch = steps.mean()
        if np.max(np.abs(steps - pitch)) > UNIFORM_TOLERANCE * pitch:
            raise SpectrumError("grid must be uniformly spaced")
        if not np.all(np.isfinite(intensity)) or np.any(intensity < 0):
            raise SpectrumError("intensity must be finite and non-negative")
        grid.setflags(write=False)
        intensity.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "axis", AxisKind(self.axis))

    @property
    def pitch(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    def integral(self) -> float:
        """Trapezoidal integral of the intensity over the grid."""
        return float(trapezoid(self.intensity, self.grid))

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.grid, self.intensity * factor, self.axis, self.shots)

    def scaled_to(self, total: float) -> "Spectrum":
        """Rescale so the integral over the grid equals ``total``."""
        current = self.integral()
        if current <= 0:
            raise SpectrumError("cannot normalise a spectrum with zero integral")
        return self.scaled(total / current)

    def to_wavelength(self, pitch: float, jacobian: bool = False) -> "Spectrum":
        """
        Resample a frequency-axis spectrum onto a uniform wavelength grid.

        Args:
            pitch: Wavelength grid pitch (nm)
            jacobian: Multiply by |df/dλ| = c/λ² so the result is a density per nm.
                Off by default: fringe visibility does not depend on it.

        Returns:
            Spectrum on a wavelength axis (nm), same shot count
        """
        if self.axis is not AxisKind.FREQUENCY:
            raise SpectrumError(f"to_wavelength needs a frequency axis, got {self.axis.value}")
        if pitch <= 0:
            raise SpectrumError(f"pitch must be positive, got {pitch}")
        c = CONSTANTS.c_nm_thz
        start = c / self.grid[-1]
        stop = c / self.grid[0]
        count = int(math.floor((stop - start) / pitch + 1e-9)) + 1
        if count < 2:
            raise GridError(f"pitch {pitch} nm is wider than the whole wavelength span {stop - start:.4g} nm")
        wavelengths = start + pitch * np.arange(count)
        frequencies = np.clip(c / wavelengths, self.grid[0], self.grid[-1])
        values = CubicSpline(self.grid, self.intensity)(frequencies)
        if jacobian:
            values = values * c / wavelengths ** 2
        return Spectrum(wavelengths, np.clip(values, 0.0, None), AxisKind.WAVELENGTH, self.shots)


@dataclass(frozen=True)
class PulsePair:
    """Stokes pulse pair: E2(t) = e^{iθ} E1(t - τ)."""
    center_wavelength: float
    duration_fwhm: float
    delay: float = 0.0
    relative_phase: float = 0.0

    def __post_init__(self):
        if self.center_wavelength <= 0:
            raise ValueError(f"center wavelength must be positive, got {self.center_wavelength}")
        if self.duration_fwhm <= 0:
            raise ValueError(f"duration must be positive, got {self.duration_fwhm}")
        if self.delay < 0:
            raise ValueError(f"delay must be non-negative, got {self.delay}")
        if not math.isfinite(self.relative_phase):
            raise ValueError("relative phase must be finite")

    @property
    def center_frequency(self) -> float:
        return nm_to_thz(self.center_wavelength)

    @property
    def bandwidth(self) -> float:
        """Spectral intensity FWHM (THz) of the transform-limited pulse."""
        return transform_limited_bandwidth(self.duration_fwhm)


class PhaseModel(str, Enum):
    CAUCHY_FREQUENCY = "cauchy_frequency"
    DIRECT_EXPONENTIAL = "direct_exponential"


class ShotEnsemble(BaseModel):
    """How many shots are averaged and how their phases are drawn."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    shots: int = Field(10_000, ge=1, description="Shots averaged per spectrum")
    seed: int = Field(2008, ge=0, lt=2 ** 64, description="Seed of the phase streams")
    phase_model: PhaseModel = Field(PhaseModel.CAUCHY_FREQUENCY, description="Relative phase model")


class ExcitationConfig(BaseModel):
    """One pump pulse pair."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    pump_wavelength_nm: float = Field(788.0, gt=0, description="Pump centre wavelength (nm)")
    duration_fs: float = Field(80.0, gt=0, description="Pump pulse duration FWHM (fs)")
    pulse_energy_pj: float = Field(380.0, ge=0, description="Energy per pump pulse (pJ)")
    delay_ps: float = Field(0.39, ge=0, description="Delay between the two pump pulses (ps)")

    def stokes_pair(self, material: MaterialParams, relative_phase: float = 0.0) -> PulsePair:
        return PulsePair(
            center_wavelength=stokes_wavelength(self.pump_wavelength_nm, material.raman_shift),
            duration_fwhm=self.duration_fs,
            delay=self.delay_ps,
            relative_phase=relative_phase,
        )

    def laser_pair(self) -> PulsePair:
        return PulsePair(self.pump_wavelength_nm, self.duration_fs, self.delay_ps, 0.0)


def transform_limited_bandwidth(duration_fs: float) -> float:
    """Spectral intensity FWHM in THz of a Gaussian pulse of ``duration_fs``."""
    return GAUSSIAN_TBP / (duration_fs * 1e-3)


def frequency_grid(center: float, span: float, pitch: float) -> np.ndarray:
    """Uniform frequency grid (THz) of at least ``span`` centred on ``center``."""
    if span <= 0 or pitch <= 0:
        raise GridError(f"span and pitch must be positive, got span={span}, pitch={pitch}")
    half = int(math.ceil(0.5 * span / pitch))
    return center + pitch * np.arange(-half, half + 1)


def plan_grid(
    center_wavelength: float,
    duration_fs: float,
    max_delay: float,
    samples_per_period: int = 16,
    span_bandwidths: float = 8.0
) -> np.ndarray:
    """
    Grid that holds the whole pulse spectrum and resolves fringes at ``max_delay``.

    Args:
        center_wavelength: Pulse centre (nm)
        duration_fs: Pulse duration FWHM (fs)
        max_delay: Largest delay to be simulated (ps)
        samples_per_period: Grid samples per fringe period 1/τ
        span_bandwidths: Grid span in units of the spectral FWHM
    """
    bandwidth = transform_limited_bandwidth(duration_fs)
    pitch = bandwidth / 64.0
    if max_delay > 0:
        pitch = min(pitch, 1.0 / (samples_per_period * max_delay))
    return frequency_grid(nm_to_thz(center_wavelength), span_bandwidths * bandwidth, pitch)


def _gaussian_envelope(center: float, bandwidth: float, grid: np.ndarray) -> np.ndarray:
    return np.exp(-4.0 * math.log(2.0) * ((grid - center) / bandwidth) ** 2)


def single_pulse_spectrum(pulse: PulsePair, grid: np.ndarray) -> Spectrum:
    """
    Unit-peak Gaussian spectral intensity |E1(ω)|² of one pulse.

    Raises:
        GridError: if the grid spans less than 6 bandwidths or the envelope at
            either edge exceeds 1e-3 of the peak
    """
    grid = np.asarray(grid, dtype=float)
    bandwidth = pulse.bandwidth
    span = grid[-1] - grid[0]
    if span < 6.0 * bandwidth:
        raise GridError(f"grid span {span:.4g} THz is narrower than 6 bandwidths ({6.0 * bandwidth:.4g} THz)")
    intensity = _gaussian_envelope(pulse.center_frequency, bandwidth, grid)
    if max(intensity[0], intensity[-1]) > EDGE_TOLERANCE:
        raise GridError(
            f"envelope at the grid edge is {max(intensity[0], intensity[-1]):.3g} of the peak; "
            f"centre the grid on {pulse.center_frequency:.4f} THz"
        )
    return Spectrum(grid, intensity, AxisKind.FREQUENCY, 1)


def sample_phases(
    model: PhaseModel,
    gamma: float,
    delay: float,
    rng: np.random.Generator,
    size: int = 1
) -> np.ndarray:
    """
    Draw relative phases θ for ``size`` shots.

    ``cauchy_frequency``: θ = δ·τ with δ Cauchy-distributed of HWHM Γ, so
    ⟨e^{iθ}⟩ = e^{-Γ|τ|}. ``direct_exponential`` draws nothing and returns
    zeros; the visibility factor is applied analytically by the caller.
    """
    model = PhaseModel(model)
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    if model is PhaseModel.DIRECT_EXPONENTIAL or gamma == 0 or delay == 0:
        return np.zeros(size)
    return gamma * abs(delay) * rng.standard_cauchy(size)


def pair_spectrum(pulse_pair: PulsePair, grid: np.ndarray) -> Spectrum:
    """Single-shot spectrum 2|E1(ω)|²(1 + cos(ωτ + θ))."""
    envelope = single_pulse_spectrum(pulse_pair, grid)
    phase = 2.0 * math.pi * envelope.grid * pulse_pair.delay + pulse_pair.relative_phase
    intensity = 2.0 * envelope.intensity * (1.0 + np.cos(phase))
    return Spectrum(envelope.grid, np.clip(intensity, 0.0, None), AxisKind.FREQUENCY, 1)


def ensemble_phasor(
    ensemble: ShotEnsemble,
    gamma: float,
    delay: float,
    stream: int = 0,
    workers: int = 1
) -> complex:
    """
    Shot average ⟨e^{iθ}⟩ of the relative phase phasor.

    Shots are drawn in fixed blocks from their own substreams and summed in
    block order, so the value does not depend on ``workers``.
    """
    if ensemble.phase_model is PhaseModel.DIRECT_EXPONENTIAL:
        return complex(math.exp(-gamma * abs(delay)))

    def _block_sum(block: Tuple[int, int]) -> complex:
        index, size = block
        rng = substream(ensemble.seed, Domain.PHASE, stream, index)
        theta = sample_phases(ensemble.phase_model, gamma, delay, rng, size)
        return complex(np.exp(1j * theta).sum())

    sums = run_blocks(_block_sum, list(block_slices(ensemble.shots)), workers)
    total = 0j
    for value in sums:
        total += value
    return total / ensemble.shots


def averaged_spectrum(
    config: ExcitationConfig,
    material: MaterialParams,
    ensemble: ShotEnsemble,
    grid: np.ndarray,
    stream: int = 0,
    workers: int = 1
) -> Spectrum:
    """
    Shot-averaged Stokes pair spectrum.

    The mean over shots of 2|E1|²(1 + cos(ωτ + θ_k)) equals
    2|E1|²(1 + Re[⟨e^{iθ}⟩ e^{iωτ}]), which is evaluated directly from the
    ensemble phasor. With ``direct_exponential`` this is exactly
    2|E1|²(1 + e^{-Γτ} cos ωτ).

    Args:
        config: Pump pulse pair (wavelength, duration, delay)
        material: Raman shift and dephasing rate
        ensemble: Shot count, seed and phase model
        grid: Frequency grid (THz) around the Stokes centre
        stream: Stream index (delay index) for the phase draws
        workers: Concurrency limit for the shot blocks
    """
    pulse = config.stokes_pair(material)
    envelope = single_pulse_spectrum(pulse, grid)
    phasor = ensemble_phasor(ensemble, material.gamma, config.delay_ps, stream, workers)
    carrier = np.exp(2j * math.pi * envelope.grid * config.delay_ps)
    intensity = 2.0 * envelope.intensity * (1.0 + np.real(phasor * carrier))
    logger.debug(
        f"Averaged {ensemble.shots} shots at τ={config.delay_ps:g} ps: |⟨e^iθ⟩|={abs(phasor):.4f}"
    )
    return Spectrum(envelope.grid, np.clip(intensity, 0.0, None), AxisKind.FREQUENCY, ensemble.shots)


def apply_alignment(pair: Spectrum, envelope: Spectrum, factor: float) -> Spectrum:
    """
    Scale the fringe contrast of ``pair`` by an external alignment factor.

    ``envelope`` is the matching single-pulse spectrum; the fringe-free part of
    the pair spectrum is 2·envelope.
    """
    if not 0 <= factor <= 1:
        raise ValueError(f"alignment factor must lie in [0, 1], got {factor}")
    if factor == 1:
        return pair
    background = 2.0 * envelope.intensity
    intensity = background + factor * (pair.intensity - background)
    return Spectrum(pair.grid, np.clip(intensity, 0.0, None), pair.axis, pair.shots)


def raman_line(
    center: float,
    fwhm: float,
    grid: np.ndarray,
    amplitude: float = 1.0,
    offset: float = 0.0
) -> Spectrum:
    """Lorentzian spontaneous Raman line on a wavenumber grid (cm^-1)."""
    if fwhm <= 0:
        raise ValueError(f"fwhm must be positive, got {fwhm}")
    grid = np.asarray(grid, dtype=float)
    half = 0.5 * fwhm
    intensity = amplitude * half ** 2 / ((grid - center) ** 2 + half ** 2) + offset
    return Spectrum(grid, intensity, AxisKind.WAVENUMBER, 1)
