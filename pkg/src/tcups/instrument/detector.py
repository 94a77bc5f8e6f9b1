"""
Spectrometer and camera model: resolution blur, pixel binning and photon counting.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import cumulative_trapezoid
from scipy.ndimage import gaussian_filter1d

from ..errors import KernelError, SamplingError, SpectrumError
from ..models.classical import UNIFORM_TOLERANCE, AxisKind, Spectrum
from ..utils.streams import Domain, substream

logger = logging.getLogger(__name__)

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
KERNEL_TRUNCATE = 8.0

# (resolution FWHM, pixel width) in nm; configuration defaults only
GRATING_DEFAULTS = {
    150: (0.6, 0.3),
    1800: (0.05, 0.025),
}


class NoiseMode(str, Enum):
    OFF = "off"
    POISSON = "poisson"


class InstrumentModel(BaseModel):
    """
    Spectrometer plus EMCCD.

    ``grating`` selects default ``resolution_fwhm`` and ``pixel_width`` for the
    150 and 1800 lines/mm gratings; any other ruling needs both set explicitly.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    grating: int = Field(1800, gt=0, description="Grating ruling (lines/mm)")
    resolution_fwhm: Optional[float] = Field(None, ge=0, description="Gaussian instrument response FWHM (nm)")
    pixel_width: Optional[float] = Field(None, gt=0, description="Pixel width on the wavelength axis (nm)")
    efficiency: float = Field(0.5, gt=0, le=1, description="Detection efficiency")
    noise: NoiseMode = Field(NoiseMode.POISSON, description="Photon counting noise")
    seed: int = Field(2008, ge=0, lt=2 ** 64, description="Seed of the counting noise")
    exposure_pulses: int = Field(1_000_000, ge=1, description="Pulses integrated per spectrum")
    oversample: int = Field(8, ge=2, description="Simulation samples per pixel")

    @model_validator(mode="before")
    @classmethod
    def _grating_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        grating = data.get("grating", 1800)
        defaults = GRATING_DEFAULTS.get(grating)
        if defaults is None:
            if data.get("resolution_fwhm") is None or data.get("pixel_width") is None:
                raise ValueError(
                    f"custom grating {grating} lines/mm needs explicit resolution_fwhm and pixel_width"
                )
            return data
        if data.get("resolution_fwhm") is None:
            data["resolution_fwhm"] = defaults[0]
        if data.get("pixel_width") is None:
            data["pixel_width"] = defaults[1]
        return data

    @property
    def simulation_pitch(self) -> float:
        """Wavelength pitch of the simulated spectrum fed into the instrument."""
        return self.pixel_width / self.oversample


@dataclass(frozen=True)
class CountsSpectrum:
    """Counts per pixel on a uniform axis of pixel centres."""
    bins: np.ndarray
    counts: np.ndarray
    exposure: int = 1
    axis: AxisKind = AxisKind.WAVELENGTH

    def __post_init__(self):
        bins = np.array(self.bins, dtype=float)
        counts = np.array(self.counts)
        if not np.issubdtype(counts.dtype, np.integer):
            counts = counts.astype(float)
        if bins.ndim != 1 or bins.size < 2 or counts.shape != bins.shape:
            raise SpectrumError(f"bins {bins.shape} and counts {counts.shape} must be matching 1-D arrays")
        steps = np.diff(bins)
        if np.any(steps <= 0):
            raise SpectrumError("bins must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > UNIFORM_TOLERANCE * steps.mean():
            raise SpectrumError("bins must be uniformly spaced")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise SpectrumError("counts must be finite and non-negative")
        if self.exposure < 1:
            raise SpectrumError(f"exposure must be at least one pulse, got {self.exposure}")
        bins.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "axis", AxisKind(self.axis))

    @property
    def pixel_width(self) -> float:
        return float((self.bins[-1] - self.bins[0]) / (self.bins.size - 1))

    @property
    def is_integer(self) -> bool:
        return bool(np.issubdtype(self.counts.dtype, np.integer))

    def total(self) -> float:
        return float(self.counts.sum())

    def to_spectrum(self) -> Spectrum:
        return Spectrum(self.bins, self.counts.astype(float), self.axis, 1)


def gaussian_visibility_factor(fwhm: float, period: float) -> float:
    """Fringe contrast kept by a Gaussian response of ``fwhm`` on fringes of ``period``."""
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    return math.exp(-(math.pi ** 2) / (4.0 * math.log(2.0)) * (fwhm / period) ** 2)


def pixel_visibility_factor(width: float, period: float) -> float:
    """Fringe contrast kept by boxcar pixels: |sin(πw/P) / (πw/P)|."""
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    return float(abs(np.sinc(width / period)))


def channel_visibility_factor(model: InstrumentModel, period: float) -> float:
    """Fringe contrast kept by the response and the pixels of ``model`` on fringes of ``period`` nm."""
    return gaussian_visibility_factor(model.resolution_fwhm, period) * pixel_visibility_factor(model.pixel_width, period)


def convolve_response(s: Spectrum, model: InstrumentModel) -> Spectrum:
    """
    Blur a wavelength-axis spectrum with the normalized Gaussian instrument response.

    Raises:
        KernelError: if the truncated kernel is longer than the grid
    """
    if s.axis is not AxisKind.WAVELENGTH:
        raise SpectrumError(f"instrument response acts on a wavelength axis, got {s.axis.value}")
    if model.resolution_fwhm == 0:
        return s
    sigma = model.resolution_fwhm * FWHM_TO_SIGMA / s.pitch
    radius = int(KERNEL_TRUNCATE * sigma + 0.5)
    if 2 * radius + 1 > s.grid.size:
        raise KernelError(
            f"response kernel spans {2 * radius + 1} samples but the grid has {s.grid.size}"
        )
    blurred = gaussian_filter1d(s.intensity, sigma, mode="nearest", truncate=KERNEL_TRUNCATE)
    return Spectrum(s.grid, np.clip(blurred, 0.0, None), s.axis, s.shots)


def pixel_bin(s: Spectrum, model: InstrumentModel, fringe_period: Optional[float] = None) -> CountsSpectrum:
    """
    Integrate intensity over CCD pixels.

    Pixel edges start at the first grid node; the trailing partial pixel is
    dropped. The integral is exact for the piecewise-linear interpolant of the
    input.

    Args:
        s: Wavelength-axis spectrum
        model: Supplies ``pixel_width``
        fringe_period: Fringe period (nm) to check the pixel pitch against

    Raises:
        SamplingError: pixel narrower than two grid steps, or wider than half
            the fringe period
    """
    if s.axis is not AxisKind.WAVELENGTH:
        raise SpectrumError(f"pixel binning acts on a wavelength axis, got {s.axis.value}")
    width = model.pixel_width
    if width < 2.0 * s.pitch * (1.0 - 1e-9):
        raise SamplingError(f"pixel width {width:g} nm is below twice the grid pitch {s.pitch:g} nm")
    if fringe_period is not None and width > 0.5 * fringe_period * (1.0 + 1e-9):
        raise SamplingError(
            f"pixel width {width:g} nm exceeds half the fringe period {fringe_period:g} nm"
        )
    span = s.grid[-1] - s.grid[0]
    n_pixels = int(math.floor(span / width + 1e-9))
    if n_pixels < 2:
        raise SamplingError(f"grid span {span:g} nm holds fewer than two pixels of {width:g} nm")
    edges = s.grid[0] + width * np.arange(n_pixels + 1)
    cumulative = cumulative_trapezoid(s.intensity, s.grid, initial=0.0)
    counts = np.diff(np.interp(edges, s.grid, cumulative))
    return CountsSpectrum(edges[:-1] + 0.5 * width, np.clip(counts, 0.0, None), exposure=1, axis=s.axis)


def apply_counting(
    s: CountsSpectrum,
    model: InstrumentModel,
    stream: int = 0,
    exposure: Optional[int] = None
) -> CountsSpectrum:
    """
    Detect ``exposure`` pulses: scale by efficiency and exposure, then add Poisson noise.

    Args:
        s: Mean photons per pixel per pulse
        model: Efficiency, noise mode and seed
        stream: Counting stream index (one per channel and delay)
        exposure: Pulses integrated; defaults to ``model.exposure_pulses``

    Returns:
        Integer counts with ``noise=poisson``, the mean otherwise
    """
    exposure = model.exposure_pulses if exposure is None else exposure
    if exposure < 1:
        raise ValueError(f"exposure must be at least one pulse, got {exposure}")
    mean = s.counts * model.efficiency * exposure
    if model.noise is NoiseMode.OFF:
        return CountsSpectrum(s.bins, mean, exposure=exposure, axis=s.axis)
    rng = substream(model.seed, Domain.COUNTING, stream)
    counts = rng.poisson(mean).astype(np.int64)
    logger.debug(f"Counted {int(counts.sum())} photons on stream {stream} (mean {mean.sum():.1f})")
    return CountsSpectrum(s.bins, counts, exposure=exposure, axis=s.axis)

