"""
Least-squares fits: exponential visibility decay and Lorentzian Raman lines.

Both fits use Levenberg-Marquardt with analytic Jacobians. Standard errors
come from the Jacobian at the optimum: absolute when every point carries a
positive sigma, otherwise scaled by the reduced chi-square.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import optimize, stats

from ..errors import FitError, InsufficientPointsError, PeakNotFoundError, SpectrumError
from ..models.classical import AxisKind, Spectrum
from ..physics import lifetime_linewidth, q_factor

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 200
PARAMETER_TOLERANCE = 1e-10
# Relative decay over the delay span below which Γ is reported as zero.
BOUNDARY_DECAY = 1e-9
PEAK_TO_NOISE = 5.0
DISAGREEMENT = 0.5


def decay_model(params: np.ndarray, delays: np.ndarray) -> np.ndarray:
    """v0·exp(-Γτ) for ``params = (v0, Γ)``."""
    v0, gamma = params
    return v0 * np.exp(-gamma * delays)


def decay_jacobian(params: np.ndarray, delays: np.ndarray) -> np.ndarray:
    """Partial derivatives of :func:`decay_model`, columns (v0, Γ)."""
    v0, gamma = params
    decay = np.exp(-gamma * delays)
    return np.column_stack([decay, -v0 * delays * decay])


def lorentzian_model(params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Lorentzian line plus constant offset.

    ``params = (center, fwhm, amplitude, offset)``; ``amplitude`` is the peak
    height above the offset.
    """
    center, fwhm, amplitude, offset = params
    half = 0.5 * fwhm
    return amplitude * half ** 2 / ((x - center) ** 2 + half ** 2) + offset


def lorentzian_jacobian(params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Partial derivatives of :func:`lorentzian_model`, columns (center, fwhm, amplitude, offset)."""
    center, fwhm, amplitude, _ = params
    half = 0.5 * fwhm
    dx = x - center
    denom = dx ** 2 + half ** 2
    return np.column_stack([
        2.0 * amplitude * half ** 2 * dx / denom ** 2,
        amplitude * half * dx ** 2 / denom ** 2,
        half ** 2 / denom,
        np.ones_like(x),
    ])


def _least_squares(residuals, jacobian, start: np.ndarray) -> optimize.OptimizeResult:
    result = optimize.least_squares(
        residuals,
        start,
        jac=jacobian,
        method="lm",
        x_scale="jac",
        xtol=PARAMETER_TOLERANCE,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=MAX_ITERATIONS,
    )
    if result.status <= 0:
        raise FitError(f"least squares did not converge: {result.message}")
    return result


def _covariance(jac: np.ndarray, cost: float, dof: int, absolute: bool) -> np.ndarray:
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError as e:
        raise FitError(f"singular Jacobian at the optimum: {e}") from e
    if not absolute:
        cov = cov * (2.0 * cost / dof if dof > 0 else 0.0)
    return cov


def _usable_sigma(sigma: Optional[np.ndarray], n: int) -> Optional[np.ndarray]:
    if sigma is None:
        return None
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n,) or not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
        return None
    return sigma


@dataclass(frozen=True)
class ExponentialFit:
    amplitude: float
    rate: float
    amplitude_stderr: float
    rate_stderr: float
    residual_rms: float
    points: int
    weighted: bool
    at_boundary: bool


def fit_exponential(
    x: Sequence[float],
    y: Sequence[float],
    sigma: Optional[Sequence[float]] = None,
    fixed_amplitude: Optional[float] = None
) -> ExponentialFit:
    """
    Fit ``y = A·exp(-k·x)``.

    Args:
        x: Abscissae (need at least three distinct values)
        y: Ordinates
        sigma: Per-point standard errors; ignored unless all are positive
        fixed_amplitude: Hold A at this value and fit k alone

    Returns:
        ExponentialFit with Jacobian-based standard errors

    Raises:
        InsufficientPointsError: fewer than three distinct abscissae
        FitError: no convergence within the iteration limit
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if np.unique(x).size < 3:
        raise InsufficientPointsError(f"need at least 3 distinct delays, got {np.unique(x).size}")
    weights = _usable_sigma(sigma, x.size)
    scale = weights if weights is not None else np.ones_like(x)

    # Log-linear start, or a gentle decay when the data touch zero
    positive = y > 0
    if positive.sum() >= 2 and np.unique(x[positive]).size >= 2:
        line = stats.linregress(x[positive], np.log(y[positive]))
        start = np.array([math.exp(line.intercept), max(-line.slope, 0.0)])
    else:
        start = np.array([float(np.max(np.abs(y))) or 1.0, 1.0 / float(np.ptp(x))])

    if fixed_amplitude is not None:
        def residuals(p):
            return (decay_model((fixed_amplitude, p[0]), x) - y) / scale

        def jacobian(p):
            return decay_jacobian((fixed_amplitude, p[0]), x)[:, 1:] / scale[:, None]

        result = _least_squares(residuals, jacobian, start[1:])
        amplitude, rate = float(fixed_amplitude), float(result.x[0])
    else:
        def residuals(p):
            return (decay_model(p, x) - y) / scale

        def jacobian(p):
            return decay_jacobian(p, x) / scale[:, None]

        result = _least_squares(residuals, jacobian, start)
        amplitude, rate = (float(v) for v in result.x)

    cov = _covariance(result.jac, result.cost, x.size - result.x.size, weights is not None)
    errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    at_boundary = rate * float(np.ptp(x)) <= BOUNDARY_DECAY
    if at_boundary:
        logger.warning(f"Decay rate at the boundary (k = {rate:.3g}); reporting k = 0")
        rate = 0.0
    return ExponentialFit(
        amplitude=amplitude,
        rate=rate,
        amplitude_stderr=0.0 if fixed_amplitude is not None else float(errors[0]),
        rate_stderr=float(errors[-1]),
        residual_rms=float(np.sqrt(np.mean((decay_model((amplitude, rate), x) - y) ** 2))),
        points=int(x.size),
        weighted=weights is not None,
        at_boundary=at_boundary,
    )


@dataclass(frozen=True)
class DecayFitResult:
    """Visibility decay V(τ) = v0·exp(-Γτ)."""
    gamma: float
    gamma_stderr: float
    v0: float
    v0_stderr: float
    residual_rms: float
    tau_points: int
    fixed_v0: bool = False
    weighted: bool = False
    at_boundary: bool = False

    @property
    def lifetime(self) -> Optional[float]:
        """Dephasing time 1/Γ in ps, None when Γ sits at zero."""
        return None if self.at_boundary else 1.0 / self.gamma

    @property
    def lifetime_stderr(self) -> Optional[float]:
        return None if self.at_boundary else self.gamma_stderr / self.gamma ** 2

    @property
    def linewidth(self) -> Optional[float]:
        """Δν = Γ/π in cm^-1."""
        return None if self.at_boundary else lifetime_linewidth(self.gamma)

    @property
    def linewidth_stderr(self) -> Optional[float]:
        if self.at_boundary:
            return None
        return lifetime_linewidth(self.gamma) * self.gamma_stderr / self.gamma

    def q_factor(self, raman_shift: float) -> Optional[float]:
        return None if self.at_boundary else q_factor(raman_shift, self.gamma)


def fit_decay(points: Sequence, fix_v0: bool = False) -> DecayFitResult:
    """
    Fit the renormalized visibilities to v0·exp(-Γτ).

    Args:
        points: Visibility points (``delay``, ``v_norm``, ``stderr`` attributes)
        fix_v0: Hold v0 at 1 instead of fitting it

    Returns:
        DecayFitResult; ``at_boundary`` is set when the data show no decay
    """
    points = list(points)
    delays = np.array([p.delay for p in points], dtype=float)
    values = np.array([p.v_norm for p in points], dtype=float)
    sigma = np.array([p.stderr for p in points], dtype=float)
    if np.any(delays < 0):
        raise ValueError("delays must be non-negative")
    fit = fit_exponential(delays, values, sigma, fixed_amplitude=1.0 if fix_v0 else None)
    result = DecayFitResult(
        gamma=fit.rate,
        gamma_stderr=fit.rate_stderr,
        v0=fit.amplitude,
        v0_stderr=fit.amplitude_stderr,
        residual_rms=fit.residual_rms,
        tau_points=fit.points,
        fixed_v0=fix_v0,
        weighted=fit.weighted,
        at_boundary=fit.at_boundary,
    )
    if not result.at_boundary:
        logger.info(f"Decay fit: 1/Γ = {result.lifetime:.3f} ± {result.lifetime_stderr:.3f} ps over {fit.points} delays")
    return result


@dataclass(frozen=True)
class LorentzianFit:
    """Lorentzian line parameters in cm^-1 with one standard error each."""
    center: float
    fwhm: float
    amplitude: float
    offset: float
    center_stderr: float
    fwhm_stderr: float
    amplitude_stderr: float
    offset_stderr: float
    residual_rms: float

    @property
    def params(self) -> Tuple[float, float, float, float]:
        return self.center, self.fwhm, self.amplitude, self.offset


def _peak_start(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    """Starting parameters and the baseline noise estimate."""
    tails = max(2, x.size // 5)
    baseline = np.concatenate([y[:tails], y[-tails:]])
    offset = float(np.median(baseline))
    noise = float(np.std(baseline, ddof=1))
    peak = int(np.argmax(y))
    amplitude = float(y[peak]) - offset
    pitch = float(x[1] - x[0])
    above = np.count_nonzero(y > offset + 0.5 * amplitude)
    fwhm = max(above * pitch, 2.0 * pitch)
    return np.array([float(x[peak]), fwhm, amplitude, offset]), noise


def fit_lorentzian(spectrum: Spectrum, sigma: Optional[Sequence[float]] = None) -> LorentzianFit:
    """
    Fit a single Lorentzian line with a constant offset.

    Args:
        spectrum: Line spectrum on the wavenumber axis (cm^-1)
        sigma: Optional per-point standard errors

    Raises:
        PeakNotFoundError: peak height below five times the baseline noise
        FitError: no convergence, or the fitted center leaves the window
    """
    if spectrum.axis is not AxisKind.WAVENUMBER:
        raise SpectrumError(f"Lorentzian fit needs a wavenumber axis, got {spectrum.axis.value}")
    x = np.asarray(spectrum.grid, dtype=float)
    y = np.asarray(spectrum.intensity, dtype=float)
    start, noise = _peak_start(x, y)
    if start[2] <= 0 or start[2] < PEAK_TO_NOISE * noise:
        raise PeakNotFoundError(f"peak height {start[2]:.3g} below {PEAK_TO_NOISE:g}x baseline noise {noise:.3g}")
    weights = _usable_sigma(sigma, x.size)
    scale = weights if weights is not None else np.ones_like(x)

    # Work relative to the starting center and height so the fit is shift and scale free
    origin, height = start[0], start[2]
    u = x - origin

    def residuals(p):
        return (lorentzian_model(p, u) - y / height) / (scale / height)

    def jacobian(p):
        return lorentzian_jacobian(p, u) / (scale / height)[:, None]

    unit_start = np.array([0.0, start[1], 1.0, start[3] / height])
    result = _least_squares(residuals, jacobian, unit_start)
    center, fwhm, amplitude, offset = result.x
    fwhm = abs(fwhm)
    cov = _covariance(result.jac, result.cost, x.size - 4, weights is not None)
    errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    fit = LorentzianFit(
        center=float(center + origin),
        fwhm=float(fwhm),
        amplitude=float(amplitude * height),
        offset=float(offset * height),
        center_stderr=float(errors[0]),
        fwhm_stderr=float(errors[1]),
        amplitude_stderr=float(errors[2] * height),
        offset_stderr=float(errors[3] * height),
        residual_rms=float(np.sqrt(np.mean((lorentzian_model(result.x, u) * height - y) ** 2))),
    )
    if not x[0] <= fit.center <= x[-1]:
        raise FitError(f"fitted center {fit.center:.3f} cm^-1 outside the window [{x[0]:.3f}, {x[-1]:.3f}]")
    logger.info(f"Lorentzian fit: center {fit.center:.3f} cm^-1, FWHM {fit.fwhm:.4f} ± {fit.fwhm_stderr:.4f} cm^-1")
    return fit


class ReconcileReport(BaseModel):
    """Time-domain linewidth Γ/π against the conventional Raman FWHM."""
    model_config = ConfigDict(frozen=True)

    linewidth_tcups: float
    linewidth_raman: float
    ratio: float
    disagreement: bool


def reconcile(decay: DecayFitResult, line: LorentzianFit) -> ReconcileReport:
    """Compare Δν = Γ/π from the decay fit with the Lorentzian FWHM."""
    if decay.at_boundary:
        raise FitError("decay fit has Γ = 0; no linewidth to reconcile")
    if line.fwhm <= 0:
        raise FitError(f"Lorentzian FWHM must be positive, got {line.fwhm}")
    linewidth = lifetime_linewidth(decay.gamma)
    ratio = linewidth / line.fwhm
    report = ReconcileReport(
        linewidth_tcups=linewidth,
        linewidth_raman=line.fwhm,
        ratio=ratio,
        disagreement=abs(ratio - 1.0) > DISAGREEMENT,
    )
    if report.disagreement:
        logger.warning(f"Linewidths disagree: Γ/π = {linewidth:.3f} vs FWHM {line.fwhm:.3f} cm^-1")
    return report
