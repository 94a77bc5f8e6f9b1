"""
Command implementations behind the CLI.

Each ``cmd_*`` returns a result dict with ``success``, ``error`` and
``error_kind`` plus its payload, and never raises for expected failures.
"""
import json
import logging
import math
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy import stats

from . import __version__
from .analysis.fitting import fit_decay, fit_lorentzian, reconcile
from .analysis.report import (
    AnalysisReport,
    DelayFailure,
    DelayFiles,
    LineRecord,
    PowerPoint,
    PowerScanReport,
    QuantumPoint,
    QuantumReport,
    RateRecord,
    RunManifest,
    plot_decay,
    plot_waterfall,
)
from .analysis.visibility import VisibilityMethod, extract_visibility, measure_fringe_spacing, renormalize
from .config import RunConfig
from .errors import ConfigError, DomainError, MissingPairError, ScanRangeError, TcupsError
from .instrument.detector import (
    CountsSpectrum,
    InstrumentModel,
    NoiseMode,
    apply_counting,
    channel_visibility_factor,
    convolve_response,
    pixel_bin,
)
from .instrument.io import read_counts_csv, write_counts_csv, write_json
from .models.classical import (
    AxisKind,
    ExcitationConfig,
    PhaseModel,
    Spectrum,
    apply_alignment,
    averaged_spectrum,
    pair_spectrum,
    plan_grid,
    raman_line,
    single_pulse_spectrum,
)
from .models.quantum import LangevinParams, decay_rate_check, integrate_langevin, perturbative_ops
from .physics import (
    DIAMOND,
    MaterialParams,
    conversion_efficiency,
    excitation_probability,
    fringe_spacing,
    lifetime_linewidth,
    pump_photon_number,
    stokes_wavelength,
    stokes_yield,
)
from .utils.runner import run_blocks
from .utils.streams import Domain, substream

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
RAMAN_LINE_NAME = "raman_line.csv"
SPECTRUM_PATTERN = re.compile(r"^(laser|stokes)_(\d+)_tau([0-9.]+)ps\.csv$")
MIN_SCAN_ENERGIES = 4
MIN_SCAN_DECADES = 2.0
DEFAULT_GAMMA_DELAYS = (0.0, 0.5, 1.0, 2.0)


def _failure(error: Exception, **payload: Any) -> Dict[str, Any]:
    """Standard failure dict; ``error_kind`` selects the exit code."""
    if isinstance(error, (ValidationError, ConfigError, DomainError, ScanRangeError)):
        kind = "validation"
    elif isinstance(error, OSError):
        kind = "io"
    elif isinstance(error, (TcupsError, ValueError)):
        kind = "analysis"
    else:
        kind = "internal"
    return {"success": False, "error": str(error), "error_kind": kind, **payload}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def spectrum_name(channel: str, index: int, delay: float) -> str:
    return f"{channel}_{index:02d}_tau{delay:.3f}ps.csv"


def stokes_counts(
    config: RunConfig,
    excitation: ExcitationConfig,
    grid: np.ndarray,
    stream: int
) -> CountsSpectrum:
    """
    Detected Stokes pair spectrum at one delay and pulse energy.

    Shot average, alignment factor, resampling to wavelength, scaling to
    photons per pulse pair, instrument response, pixels and counting.
    """
    material = config.material
    instrument = config.instrument
    pair = averaged_spectrum(excitation, material, config.ensemble, grid, stream=stream)
    envelope = single_pulse_spectrum(excitation.stokes_pair(material), grid)
    pair = apply_alignment(pair, envelope, config.excitation.alignment_factor)
    photons = 2.0 * stokes_yield(excitation.pulse_energy_pj, config.excitation.yield_calibration)
    center = stokes_wavelength(excitation.pump_wavelength_nm, material.raman_shift)
    return _detect(pair, instrument, photons, fringe_spacing(center, excitation.delay_ps), 2 * stream + 1)


def laser_counts(
    config: RunConfig,
    excitation: ExcitationConfig,
    grid: np.ndarray,
    stream: int
) -> CountsSpectrum:
    """Detected spectrum of the attenuated, fully coherent pump pulse pair."""
    pulses = excitation.laser_pair()
    pair = pair_spectrum(pulses, grid)
    envelope = single_pulse_spectrum(pulses, grid)
    pair = apply_alignment(pair, envelope, config.excitation.alignment_factor)
    photons = 2.0 * pump_photon_number(excitation.pulse_energy_pj, pulses.center_wavelength)
    photons *= config.excitation.laser_attenuation
    return _detect(pair, config.instrument, photons, fringe_spacing(pulses.center_wavelength, pulses.delay), 2 * stream)


def _detect(pair: Spectrum, instrument: InstrumentModel, photons: float, period: float, stream: int) -> CountsSpectrum:
    spectrum = pair.to_wavelength(instrument.simulation_pitch).scaled_to(photons)
    spectrum = convolve_response(spectrum, instrument)
    binned = pixel_bin(spectrum, instrument, fringe_period=period)
    return apply_counting(binned, instrument, stream=stream)


def _channel_grids(config: RunConfig) -> Tuple[np.ndarray, np.ndarray]:
    plan = config.excitation
    max_delay = max(max(plan.delays_ps), plan.scan_delay_ps)
    stokes = stokes_wavelength(plan.pump_wavelength_nm, config.material.raman_shift)
    return (
        plan_grid(plan.pump_wavelength_nm, plan.duration_fs, max_delay),
        plan_grid(stokes, plan.duration_fs, max_delay),
    )


def simulate_raman_line(config: RunConfig) -> CountsSpectrum:
    """Conventional Raman line with FWHM Γ/π unless configured otherwise."""
    line = config.raman_line
    material = config.material
    fwhm = line.fwhm_cm_inv or lifetime_linewidth(material.gamma)
    half = int(math.ceil(0.5 * line.span_cm_inv / line.pitch_cm_inv))
    grid = material.raman_shift + line.pitch_cm_inv * np.arange(-half, half + 1)
    mean = raman_line(material.raman_shift, fwhm, grid, line.peak_counts, line.offset_counts).intensity
    if config.instrument.noise is NoiseMode.POISSON:
        counts = substream(config.instrument.seed, Domain.RAMAN_LINE).poisson(mean).astype(np.int64)
    else:
        counts = mean
    return CountsSpectrum(grid, counts, exposure=1, axis=AxisKind.WAVENUMBER)


def cmd_simulate(config: RunConfig, workers: int = 1) -> Dict[str, Any]:
    """
    Simulate laser and Stokes pair spectra for every delay and write them with a manifest.

    Args:
        config: Validated run configuration
        workers: Per-delay jobs run concurrently; outputs do not depend on it

    Returns:
        Dict with the manifest and output directory
    """
    try:
        started = _now()
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        laser_grid, stokes_grid = _channel_grids(config)
        delays = list(enumerate(config.excitation.delays_ps))
        logger.info(f"Simulating {len(delays)} delays with {config.ensemble.shots} shots into {out}")

        def job(item: Tuple[int, float]) -> DelayFiles:
            index, delay = item
            excitation = config.excitation.at_delay(delay)
            laser = laser_counts(config, excitation, laser_grid, index)
            stokes = stokes_counts(config, excitation, stokes_grid, index)
            laser_name = spectrum_name("laser", index, delay)
            stokes_name = spectrum_name("stokes", index, delay)
            write_counts_csv(out / laser_name, laser)
            write_counts_csv(out / stokes_name, stokes)
            return DelayFiles(index=index, delay_ps=delay, laser=laser_name, stokes=stokes_name)

        files = run_blocks(job, delays, workers)
        raman_name = None
        if config.raman_line is not None:
            write_counts_csv(out / RAMAN_LINE_NAME, simulate_raman_line(config))
            raman_name = RAMAN_LINE_NAME

        manifest = RunManifest(
            config_hash=config.config_hash(),
            version=__version__,
            seed=config.seed,
            started=started,
            finished=_now(),
            workers=workers,
            files=files,
            raman_line=raman_name,
            config=config.model_dump(mode="json"),
        )
        write_json(out / MANIFEST_NAME, manifest.model_dump(mode="json"))
        return {
            "success": True,
            "error": None,
            "error_kind": None,
            "output_dir": str(out),
            "manifest": manifest.model_dump(mode="json"),
        }
    except Exception as e:
        logger.error(f"Simulation failed: {str(e)}")
        return _failure(e, output_dir=config.output_dir, manifest=None)


def find_pairs(spectra_dir: Path) -> List[Tuple[int, float, Path, Path]]:
    """
    Matched ``(index, delay, laser, stokes)`` files of a spectra directory.

    Raises:
        MissingPairError: no spectra, or a delay with only one channel
    """
    found: Dict[Tuple[int, str], Dict[str, Path]] = {}
    for path in sorted(Path(spectra_dir).iterdir()):
        match = SPECTRUM_PATTERN.match(path.name)
        if match:
            channel, index, delay = match.groups()
            found.setdefault((int(index), delay), {})[channel] = path
    if not found:
        raise MissingPairError(f"no laser/stokes spectra in {spectra_dir}")
    pairs = []
    for (index, delay), channels in sorted(found.items()):
        missing = {"laser", "stokes"} - set(channels)
        if missing:
            raise MissingPairError(f"delay {delay} ps (index {index}) has no {', '.join(sorted(missing))} spectrum")
        pairs.append((index, float(delay), channels["laser"], channels["stokes"]))
    return pairs


def _read_manifest(spectra_dir: Path) -> Optional[Dict[str, Any]]:
    path = spectra_dir / MANIFEST_NAME
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def _instrument_correction(instrument: InstrumentModel, laser_nm: float, stokes_nm: float, delay: float) -> float:
    """Laser-to-Stokes ratio of the contrast kept by the instrument at ``delay``."""
    laser = channel_visibility_factor(instrument, fringe_spacing(laser_nm, delay))
    stokes = channel_visibility_factor(instrument, fringe_spacing(stokes_nm, delay))
    return laser / stokes


def cmd_analyze(
    spectra_dir: Union[str, Path],
    out: Optional[Union[str, Path]] = None,
    plot: bool = False,
    method: Union[VisibilityMethod, str] = VisibilityMethod.FOURIER,
    fix_v0: bool = False
) -> Dict[str, Any]:
    """
    Reduce a spectra directory to visibilities, a decay fit and a linewidth.

    Per-delay extraction failures are recorded and skipped; the fit needs
    at least three surviving delays. With a run manifest the Stokes/laser
    ratio is corrected for the instrument contrast at each channel's own
    fringe period, and the random-phase shot average enters each point's
    standard error.

    Args:
        spectra_dir: Output of ``cmd_simulate`` or measured spectra in the same format
        out: Where to write report.json and plots; defaults to ``spectra_dir``
        plot: Also write waterfall.svg and decay.svg
        method: Visibility estimator
        fix_v0: Hold the decay amplitude at 1

    Returns:
        Dict with the report and the list of written files
    """
    try:
        method = VisibilityMethod(method)
        spectra_dir = Path(spectra_dir)
        if not spectra_dir.is_dir():
            raise FileNotFoundError(f"spectra directory {spectra_dir} does not exist")
        out = Path(out) if out is not None else spectra_dir
        out.mkdir(parents=True, exist_ok=True)
        manifest = _read_manifest(spectra_dir)
        material, seed, exposure = DIAMOND, 2008, 1
        channels: Optional[Tuple[InstrumentModel, float, float]] = None
        shots: Optional[int] = None
        if manifest is not None:
            run = manifest["config"]
            material = MaterialParams.model_validate(run["material"])
            seed = int(manifest["seed"])
            exposure = int(run["instrument"]["exposure_pulses"])
            pump = float(run["excitation"]["pump_wavelength_nm"])
            channels = (
                InstrumentModel.model_validate(run["instrument"]),
                pump,
                stokes_wavelength(pump, material.raman_shift),
            )
            if run["ensemble"]["phase_model"] == PhaseModel.CAUCHY_FREQUENCY.value:
                shots = int(run["ensemble"]["shots"])

        measured, failures, spacing, traces = [], [], {}, []
        for index, delay, laser_path, stokes_path in find_pairs(spectra_dir):
            laser = read_counts_csv(laser_path, exposure)
            stokes = read_counts_csv(stokes_path, exposure)
            traces.append((delay, stokes.bins, stokes.counts))
            try:
                v_laser = extract_visibility(laser, delay, method, seed=seed, stream=2 * index)
                v_stokes = extract_visibility(stokes, delay, method, seed=seed, stream=2 * index + 1)
                measured.append((delay, v_stokes, v_laser))
                spacing[f"{delay:.3f}"] = measure_fringe_spacing(stokes, delay)
            except TcupsError as e:
                logger.warning(f"Skipping delay {delay} ps: {str(e)}")
                failures.append(DelayFailure(delay_ps=delay, error=str(e)))
        points = []
        for delay, v_stokes, v_laser in measured:
            try:
                correction = [_instrument_correction(*channels, delay)] if channels is not None else None
                points.extend(renormalize([(v_stokes, v_laser)], [delay], correction, shots))
            except TcupsError as e:
                logger.warning(f"Skipping delay {delay} ps: {str(e)}")
                failures.append(DelayFailure(delay_ps=delay, error=str(e)))

        fit = fit_decay(points, fix_v0=fix_v0)
        extra: Dict[str, Any] = {"failures": failures, "fringe_spacing_nm": spacing}
        raman_path = spectra_dir / RAMAN_LINE_NAME
        if raman_path.exists():
            counts = read_counts_csv(raman_path)
            sigma = np.sqrt(np.maximum(counts.counts, 1.0)) if counts.is_integer else None
            line = fit_lorentzian(counts.to_spectrum(), sigma)
            extra["raman_line"] = LineRecord.from_fit(line)
            if not fit.at_boundary:
                extra["reconcile"] = reconcile(fit, line)

        report = AnalysisReport.build(fit, points, material.raman_shift, method.value, seed, __version__, **extra)
        written = [str(write_json(out / "report.json", report.model_dump(mode="json")))]
        if plot:
            provenance = f"tcups {__version__}; source {spectra_dir.resolve()}; seed {seed}"
            written.append(str(plot_waterfall(traces, out / "waterfall.svg", provenance)))
            written.append(str(plot_decay(points, fit, out / "decay.svg", provenance)))
        return {
            "success": True,
            "error": None,
            "error_kind": None,
            "report": report.model_dump(mode="json"),
            "files": written,
        }
    except Exception as e:
        logger.error(f"Analysis failed: {str(e)}")
        return _failure(e, report=None, files=[])


def _r_squared(observed: np.ndarray, expected: np.ndarray) -> Optional[float]:
    total = float(np.sum((observed - observed.mean()) ** 2))
    if total == 0:
        return None
    return 1.0 - float(np.sum((observed - expected) ** 2)) / total


def cmd_quantum_check(
    params: LangevinParams,
    gamma_delays: Sequence[float] = DEFAULT_GAMMA_DELAYS,
    rate_check: bool = False,
    workers: int = 1,
    out: Optional[Union[str, Path]] = None
) -> Dict[str, Any]:
    """
    Compare the stochastic Langevin correlation with the perturbative result.

    Args:
        params: Langevin parameters
        gamma_delays: Grid of Γ·τ values; taken as delays in ps when Γ = 0
        rate_check: Also fit amplitude and population decay rates
        workers: Concurrency limit for trajectory blocks
        out: Optional path of the JSON report
    """
    try:
        scale = 1.0 / params.gamma if params.gamma > 0 else 1.0
        delays = [gd * scale for gd in gamma_delays]
        warnings: List[str] = list(params.regime_warnings())
        points = []
        for index, delay in enumerate(delays):
            numeric = integrate_langevin(params, delay, stream=index, workers=workers)
            analytic = perturbative_ops(params, delay)
            difference = abs(numeric.corr - analytic.corr)
            if numeric.stderr > 0:
                deviation = difference / numeric.stderr
            else:
                deviation = 0.0 if difference <= 1e-12 * max(abs(analytic.corr), 1e-300) else math.inf
            points.append(QuantumPoint(
                delay_ps=delay,
                gamma_delay=params.gamma * delay,
                corr_re=numeric.corr.real,
                corr_im=numeric.corr.imag,
                corr_abs=abs(numeric.corr),
                n1=numeric.n1,
                n2=numeric.n2,
                stderr=numeric.stderr,
                perturbative=analytic.corr.real,
                deviation_sigma=deviation,
                within_3sigma=deviation <= 3.0,
                cauchy_schwarz=numeric.satisfies_bound(),
            ))

        r_squared = None
        zero = [p for p in points if p.delay_ps == 0.0]
        if zero and zero[0].corr_re > 0:
            observed = np.array([p.corr_re for p in points]) / zero[0].corr_re
            r_squared = _r_squared(observed, np.exp(-params.gamma * np.array(delays)))

        rates = None
        if rate_check and params.gamma > 0:
            rate_report = decay_rate_check(params, delays, workers=workers)
            rates = RateRecord(
                amplitude_rate=rate_report.amplitude_rate,
                amplitude_stderr=rate_report.amplitude_stderr,
                population_rate=rate_report.population_rate,
                population_stderr=rate_report.population_stderr,
                ratio=rate_report.ratio,
            )

        report = QuantumReport(
            params=params.model_dump(mode="json"),
            points=points,
            all_within_3sigma=all(p.within_3sigma for p in points),
            r_squared=r_squared,
            rates=rates,
            warnings=warnings,
            version=__version__,
        )
        payload = report.model_dump(mode="json")
        if out is not None:
            write_json(Path(out), payload)
        return {"success": True, "error": None, "error_kind": None, "report": payload}
    except Exception as e:
        logger.error(f"Quantum check failed: {str(e)}")
        return _failure(e, report=None)


def cmd_power_scan(
    config: RunConfig,
    workers: int = 1,
    out: Optional[Union[str, Path]] = None
) -> Dict[str, Any]:
    """
    Stokes yield and visibility across pump energies at a fixed delay.

    Raises nothing; a scan with fewer than four energies or spanning less
    than two decades is reported as a validation failure.
    """
    try:
        plan = config.excitation
        energies = sorted(plan.energies_pj)
        if len(energies) < MIN_SCAN_ENERGIES:
            raise ScanRangeError(f"power scan needs at least {MIN_SCAN_ENERGIES} energies, got {len(energies)}")
        decades = math.log10(energies[-1] / energies[0])
        if decades < MIN_SCAN_DECADES:
            raise ScanRangeError(f"power scan spans {decades:.2f} decades; need at least {MIN_SCAN_DECADES:g}")

        _, stokes_grid = _channel_grids(config)
        center = stokes_wavelength(plan.pump_wavelength_nm, config.material.raman_shift)

        def job(item: Tuple[int, float]) -> PowerPoint:
            index, energy = item
            excitation = plan.at_delay(plan.scan_delay_ps, energy)
            counts = stokes_counts(config, excitation, stokes_grid, index)
            v = extract_visibility(counts, plan.scan_delay_ps, seed=config.instrument.seed, stream=index)
            photons = stokes_yield(energy, plan.yield_calibration)
            return PowerPoint(
                energy_pj=energy,
                stokes_photons=photons,
                excitation_probability=excitation_probability(photons),
                conversion_efficiency=conversion_efficiency(photons, energy, center),
                visibility=v.value,
                visibility_stderr=v.stderr,
            )

        points = run_blocks(job, list(enumerate(energies)), workers)
        line = stats.linregress(np.log10(energies), np.log10([p.stokes_photons for p in points]))
        visibilities = [p.visibility for p in points]
        report = PowerScanReport(
            delay_ps=plan.scan_delay_ps,
            slope=float(line.slope),
            slope_stderr=float(line.stderr),
            intercept=float(line.intercept),
            visibility_spread=float(max(visibilities) - min(visibilities)),
            points=points,
            calibration=plan.yield_calibration,
            seed=config.seed,
            version=__version__,
        )
        payload = report.model_dump(mode="json")
        if out is not None:
            write_json(Path(out), payload)
        return {"success": True, "error": None, "error_kind": None, "report": payload}
    except Exception as e:
        logger.error(f"Power scan failed: {str(e)}")
        return _failure(e, report=None)
