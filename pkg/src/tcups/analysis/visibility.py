"""
Fringe visibility of pulse-pair spectra.

The primary estimator works in the time domain: the spectrum is transformed
as Ŝ(t) = Σ y_k w_k exp(2πi (f_k - f_ref) t) with quadrature weights w_k for
its axis, and the visibility is 2|Ŝ(τ)|/|Ŝ(0)| at the sideband near the
expected delay. The secondary estimator fits envelope × (1 + v cos) directly.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from ..errors import FitError, LaserVisibilityError, NoSidebandError, SamplingError, SpectrumError
from ..instrument.detector import CountsSpectrum
from ..models.classical import AxisKind, Spectrum
from ..physics import CONSTANTS, cm_inv_to_thz
from ..utils.streams import Domain, substream

logger = logging.getLogger(__name__)

SEARCH_WINDOW = 0.1
MAX_VISIBILITY = 1.05
MIN_SAMPLES_PER_PERIOD = 4
# Sideband below this fraction of the DC term counts as no fringes at all
ZERO_SIDEBAND = 1e-9
NOISE_FLOOR_FACTOR = 4.0
# Noise floor sampled over [1.1τ + 0.5, 1.1τ + 2.5] ps
FLOOR_OFFSET = 0.5
FLOOR_SPAN = 2.0
BOOTSTRAP_DRAWS = 32
MIN_LASER_VISIBILITY = 0.05

SpectrumLike = Union[Spectrum, CountsSpectrum]


class VisibilityMethod(str, Enum):
    FOURIER = "fourier"
    DIRECT = "direct"


@dataclass(frozen=True)
class VisibilityEstimate:
    """Fringe visibility with its bootstrap standard error."""
    value: float
    stderr: float
    delay: float
    delay_fit: float
    method: VisibilityMethod = VisibilityMethod.FOURIER

    def __iter__(self) -> Iterator[float]:
        yield self.value
        yield self.stderr


@dataclass(frozen=True)
class VisibilityPoint:
    """Stokes and laser visibility at one delay, and their ratio."""
    delay: float
    v_stokes: float
    v_laser: float
    v_norm: float
    stderr: float

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError(f"delay must be non-negative, got {self.delay}")
        if min(self.v_stokes, self.v_laser, self.v_norm) < 0:
            raise ValueError("visibilities must be non-negative")

    def to_dict(self) -> dict:
        return {
            "delay_ps": self.delay,
            "v_stokes": self.v_stokes,
            "v_laser": self.v_laser,
            "v_norm": self.v_norm,
            "stderr": self.stderr,
        }


@dataclass(frozen=True)
class _Samples:
    """Spectrum samples on an optical frequency axis with quadrature weights."""
    frequency: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    integer: bool


def _samples(s: SpectrumLike) -> _Samples:
    if isinstance(s, CountsSpectrum):
        grid, values, axis, integer = s.bins, s.counts.astype(float), s.axis, s.is_integer
        # Counts already integrate over the pixel
        step = 1.0
    else:
        grid, values, axis, integer = s.grid, np.asarray(s.intensity, dtype=float), s.axis, False
        step = s.pitch
    c = CONSTANTS.c_nm_thz
    if axis is AxisKind.FREQUENCY:
        frequency = np.asarray(grid, dtype=float)
        weights = np.full_like(frequency, step)
    elif axis is AxisKind.WAVELENGTH:
        frequency = c / grid
        weights = c * step / grid ** 2
    else:
        frequency = cm_inv_to_thz(np.asarray(grid, dtype=float))
        weights = np.full_like(frequency, cm_inv_to_thz(step))
    if not np.any(values > 0):
        raise SpectrumError("spectrum is identically zero")
    return _Samples(frequency, values, weights, integer)


def _transform(samples: _Samples, values: np.ndarray, reference: float, times: np.ndarray) -> np.ndarray:
    """Ŝ(t) for every t in ``times``."""
    phase = 2.0 * math.pi * np.outer(times, samples.frequency - reference)
    return np.exp(1j * phase) @ (values * samples.weights)


def _check_sampling(samples: _Samples, expected_delay: float) -> None:
    steps = np.abs(np.diff(samples.frequency))
    per_period = 1.0 / (expected_delay * steps.max())
    if per_period < MIN_SAMPLES_PER_PERIOD:
        raise SamplingError(
            f"{per_period:.2f} samples per fringe period at τ={expected_delay:g} ps; "
            f"need at least {MIN_SAMPLES_PER_PERIOD}"
        )


def _locate_sideband(samples: _Samples, reference: float, expected_delay: float) -> Tuple[float, complex]:
    """Peak of |Ŝ(t)| within ±10% of the expected delay."""
    lo = (1.0 - SEARCH_WINDOW) * expected_delay
    hi = (1.0 + SEARCH_WINDOW) * expected_delay
    span = float(np.ptp(samples.frequency))
    count = max(41, int(math.ceil(8.0 * (hi - lo) * span)) + 1)
    times = np.linspace(lo, hi, count)
    magnitude = np.abs(_transform(samples, samples.values, reference, times))
    best = int(np.argmax(magnitude))
    step = times[1] - times[0]
    a, b = max(lo, times[best] - step), min(hi, times[best] + step)

    def objective(t: float) -> float:
        return -abs(_transform(samples, samples.values, reference, np.array([t]))[0])

    refined = optimize.minimize_scalar(objective, bounds=(a, b), method="bounded", options={"xatol": 1e-9 * hi})
    t_star = float(refined.x) if -refined.fun >= magnitude[best] else float(times[best])
    return t_star, _transform(samples, samples.values, reference, np.array([t_star]))[0]


def _noise_floor(samples: _Samples, reference: float, expected_delay: float) -> float:
    start = (1.0 + SEARCH_WINDOW) * expected_delay + FLOOR_OFFSET
    times = np.linspace(start, start + FLOOR_SPAN, 64)
    return float(np.median(np.abs(_transform(samples, samples.values, reference, times))))


def _fourier_value(samples: _Samples, values: np.ndarray, reference: float, t_star: float) -> float:
    transform = _transform(samples, values, reference, np.array([0.0, t_star]))
    return 2.0 * abs(transform[1]) / abs(transform[0])


def _clip(value: float, delay: float) -> float:
    if value > MAX_VISIBILITY:
        logger.warning(f"Visibility {value:.4f} at τ={delay:g} ps clipped to {MAX_VISIBILITY}")
        return MAX_VISIBILITY
    return value


def _fringe_model(params: np.ndarray, frequency: np.ndarray, reference: float) -> np.ndarray:
    amplitude, center, width, visibility, delay, phase = params
    envelope = amplitude * np.exp(-4.0 * math.log(2.0) * ((frequency - center) / width) ** 2)
    return envelope * (1.0 + visibility * np.cos(2.0 * math.pi * (frequency - reference) * delay + phase))


def _direct_fit(samples: _Samples, values: np.ndarray, reference: float, start: np.ndarray) -> np.ndarray:
    scale = float(values.max())

    def residuals(p):
        return _fringe_model(p, samples.frequency, reference) - values / scale

    unit_start = start.copy()
    unit_start[0] = start[0] / scale
    result = optimize.least_squares(residuals, unit_start, method="lm", xtol=1e-12, ftol=1e-12, max_nfev=2000)
    if result.status <= 0:
        raise FitError(f"direct fringe fit did not converge: {result.message}")
    params = result.x.copy()
    params[0] *= scale
    params[2] = abs(params[2])
    if params[3] < 0:
        params[3] = -params[3]
        params[5] += math.pi
    return params


def _direct_start(samples: _Samples, reference: float, t_star: float, value: float, sideband: complex) -> np.ndarray:
    density = samples.values * samples.weights
    centroid = float(np.sum(samples.frequency * density) / np.sum(density))
    spread = math.sqrt(float(np.sum((samples.frequency - centroid) ** 2 * density) / np.sum(density)))
    width = 2.0 * math.sqrt(2.0 * math.log(2.0)) * spread
    return np.array([float(samples.values.max()) / (1.0 + value), centroid, width, value, t_star, -np.angle(sideband)])


def extract_visibility(
    s: SpectrumLike,
    expected_delay: float,
    method: VisibilityMethod = VisibilityMethod.FOURIER,
    bootstrap: int = BOOTSTRAP_DRAWS,
    seed: int = 2008,
    stream: int = 0
) -> VisibilityEstimate:
    """
    Measure fringe visibility near ``expected_delay``.

    Args:
        s: Spectrum (any axis) or counts spectrum
        expected_delay: Nominal pulse delay (ps); the sideband is searched within ±10%
        method: ``fourier`` (sideband ratio) or ``direct`` (envelope × fringe fit)
        bootstrap: Parametric Poisson resamples for the standard error of integer counts
        seed: Seed of the bootstrap stream
        stream: Bootstrap stream index

    Returns:
        VisibilityEstimate; unpacks as ``(value, stderr)``

    Raises:
        SamplingError: fewer than four samples per fringe period
        NoSidebandError: no peak above four times the noise floor near the delay
    """
    method = VisibilityMethod(method)
    if expected_delay <= 0:
        raise ValueError(f"expected delay must be positive, got {expected_delay}")
    samples = _samples(s)
    _check_sampling(samples, expected_delay)
    reference = float(np.sum(samples.frequency * samples.values * samples.weights) / np.sum(samples.values * samples.weights))

    t_star, sideband = _locate_sideband(samples, reference, expected_delay)
    dc = abs(_transform(samples, samples.values, reference, np.array([0.0]))[0])
    if abs(sideband) <= ZERO_SIDEBAND * dc:
        return VisibilityEstimate(0.0, 0.0, expected_delay, t_star, method)
    floor = _noise_floor(samples, reference, expected_delay)
    if abs(sideband) <= NOISE_FLOOR_FACTOR * floor:
        raise NoSidebandError(
            f"sideband {abs(sideband):.3g} at τ={t_star:.4f} ps is within {NOISE_FLOOR_FACTOR:g}x "
            f"the noise floor {floor:.3g}"
        )
    fourier = 2.0 * abs(sideband) / dc

    if method is VisibilityMethod.FOURIER:
        def estimate(values: np.ndarray) -> float:
            return _fourier_value(samples, values, reference, t_star)

        value, delay_fit = fourier, t_star
    else:
        start = _direct_start(samples, reference, t_star, fourier, sideband)
        params = _direct_fit(samples, samples.values, reference, start)

        def estimate(values: np.ndarray) -> float:
            return float(_direct_fit(samples, values, reference, params)[3])

        value, delay_fit = float(params[3]), float(params[4])

    stderr = 0.0
    if samples.integer and bootstrap > 1:
        rng = substream(seed, Domain.BOOTSTRAP, stream)
        draws = [estimate(rng.poisson(samples.values).astype(float)) for _ in range(bootstrap)]
        stderr = float(np.std(draws, ddof=1))

    return VisibilityEstimate(_clip(value, expected_delay), stderr, expected_delay, delay_fit, method)


def _wavelength_masses(s: SpectrumLike) -> Tuple[np.ndarray, np.ndarray]:
    """Sample wavelengths (nm) and the intensity each sample holds."""
    if isinstance(s, CountsSpectrum):
        grid, mass, axis = s.bins, s.counts.astype(float), s.axis
    else:
        grid, mass, axis = s.grid, np.asarray(s.intensity, dtype=float) * s.pitch, s.axis
    if axis is AxisKind.FREQUENCY:
        wavelength = CONSTANTS.c_nm_thz / np.asarray(grid, dtype=float)
    elif axis is AxisKind.WAVENUMBER:
        wavelength = 1e7 / np.asarray(grid, dtype=float)
    else:
        wavelength = np.asarray(grid, dtype=float)
    return wavelength, mass


def measure_fringe_spacing(s: SpectrumLike, expected_delay: float) -> float:
    """
    Fringe period in nm, measured on the wavelength axis.

    The period is the peak of the periodogram |Σ m_k exp(2πi λ_k / P)| of the
    sample intensities m_k, searched within ±10% of the period expected at
    the spectrum's centroid for ``expected_delay``.

    Raises:
        SamplingError: fewer than four samples per fringe period
    """
    samples = _samples(s)
    _check_sampling(samples, expected_delay)
    wavelength, mass = _wavelength_masses(s)
    centroid = float(np.sum(wavelength * mass) / np.sum(mass))
    offsets = wavelength - centroid
    expected = centroid ** 2 / (CONSTANTS.c_nm_thz * expected_delay)
    lo = 1.0 / ((1.0 + SEARCH_WINDOW) * expected)
    hi = 1.0 / ((1.0 - SEARCH_WINDOW) * expected)

    def magnitude(k: np.ndarray) -> np.ndarray:
        return np.abs(np.exp(2j * math.pi * np.outer(k, offsets)) @ mass)

    count = max(41, int(math.ceil(8.0 * (hi - lo) * float(np.ptp(wavelength)))) + 1)
    k = np.linspace(lo, hi, count)
    power = magnitude(k)
    best = int(np.argmax(power))
    step = k[1] - k[0]
    refined = optimize.minimize_scalar(
        lambda x: -magnitude(np.array([x]))[0],
        bounds=(max(lo, k[best] - step), min(hi, k[best] + step)),
        method="bounded",
        options={"xatol": 1e-10 * hi},
    )
    k_star = float(refined.x) if -refined.fun >= power[best] else float(k[best])
    return 1.0 / k_star


def _value_and_error(v: Union[float, VisibilityEstimate]) -> Tuple[float, float]:
    if isinstance(v, VisibilityEstimate):
        return v.value, v.stderr
    return float(v), 0.0


def renormalize(
    pairs: Sequence[Tuple[Union[float, VisibilityEstimate], Union[float, VisibilityEstimate]]],
    delays: Optional[Sequence[float]] = None,
    corrections: Optional[Sequence[float]] = None,
    shots: Optional[int] = None
) -> List[VisibilityPoint]:
    """
    Divide each Stokes visibility by the laser visibility at the same delay.

    Args:
        pairs: ``(v_stokes, v_laser)`` as floats or VisibilityEstimate
        delays: Delay of each pair; defaults to the estimates' nominal delays
        corrections: Laser-to-Stokes ratio of the instrument contrast factors
            at each delay, for channels whose fringe periods differ
        shots: Shots averaged into each Stokes spectrum with random phases;
            adds the ensemble variance (1 - V²)/(2·shots) to each point

    Raises:
        LaserVisibilityError: a laser visibility at or below 0.05
    """
    if shots is not None and shots < 1:
        raise ValueError(f"shots must be at least one, got {shots}")
    points = []
    for index, (stokes, laser) in enumerate(pairs):
        v_s, e_s = _value_and_error(stokes)
        v_l, e_l = _value_and_error(laser)
        if delays is not None:
            delay = float(delays[index])
        elif isinstance(stokes, VisibilityEstimate):
            delay = stokes.delay
        else:
            delay = 0.0
        if v_l <= MIN_LASER_VISIBILITY:
            raise LaserVisibilityError(
                f"laser visibility {v_l:.4f} at τ={delay:g} ps is below {MIN_LASER_VISIBILITY}"
            )
        scale = 1.0 if corrections is None else float(corrections[index])
        v_norm = scale * v_s / v_l
        stderr = scale * math.hypot(e_s / v_l, v_s * e_l / v_l ** 2)
        if shots is not None:
            v = min(v_norm, 1.0)
            stderr = math.sqrt(stderr ** 2 + (1.0 - v * v) / (2.0 * shots))
        for name, v, e in (("Stokes", v_s, e_s), ("laser", v_l, e_l)):
            if v > 1.0 + 3.0 * e:
                logger.warning(f"{name} visibility {v:.4f} at τ={delay:g} ps exceeds 1 + 3σ")
        points.append(VisibilityPoint(delay, v_s, v_l, v_norm, stderr))
    return points
