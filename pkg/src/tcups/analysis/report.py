"""
Report models, their JSON schemas, and SVG plots.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .fitting import DecayFitResult, LorentzianFit, ReconcileReport, decay_model
from .visibility import VisibilityPoint

logger = logging.getLogger(__name__)


class _Report(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PointRecord(_Report):
    delay_ps: float
    v_stokes: float
    v_laser: float
    v_norm: float
    stderr: float

    @classmethod
    def from_point(cls, point: VisibilityPoint) -> "PointRecord":
        return cls(**point.to_dict())


class DelayFailure(_Report):
    delay_ps: float
    error: str


class LineRecord(_Report):
    center_cm_inv: float
    fwhm_cm_inv: float
    fwhm_stderr: float
    amplitude: float
    offset: float

    @classmethod
    def from_fit(cls, fit: LorentzianFit) -> "LineRecord":
        return cls(
            center_cm_inv=fit.center,
            fwhm_cm_inv=fit.fwhm,
            fwhm_stderr=fit.fwhm_stderr,
            amplitude=fit.amplitude,
            offset=fit.offset,
        )


class AnalysisReport(_Report):
    """Visibility table, decay fit and derived linewidth of one spectra directory."""
    gamma_ps_inv: float
    gamma_stderr: float
    lifetime_ps: Optional[float] = Field(None, description="1/Γ; null when Γ sits at zero")
    lifetime_stderr: Optional[float] = None
    linewidth_cm_inv: Optional[float] = Field(None, description="Δν = Γ/π (FWHM)")
    q_factor: Optional[float] = None
    v0: float
    v0_stderr: float
    residual_rms: float
    at_boundary: bool
    points: List[PointRecord]
    failures: List[DelayFailure] = Field(default_factory=list)
    fringe_spacing_nm: Dict[str, float] = Field(default_factory=dict)
    raman_line: Optional[LineRecord] = None
    reconcile: Optional[ReconcileReport] = None
    method: str
    seed: int
    version: str

    @classmethod
    def build(
        cls,
        fit: DecayFitResult,
        points: Sequence[VisibilityPoint],
        raman_shift: float,
        method: str,
        seed: int,
        version: str,
        **extra: Any
    ) -> "AnalysisReport":
        return cls(
            gamma_ps_inv=fit.gamma,
            gamma_stderr=fit.gamma_stderr,
            lifetime_ps=fit.lifetime,
            lifetime_stderr=fit.lifetime_stderr,
            linewidth_cm_inv=fit.linewidth,
            q_factor=fit.q_factor(raman_shift),
            v0=fit.v0,
            v0_stderr=fit.v0_stderr,
            residual_rms=fit.residual_rms,
            at_boundary=fit.at_boundary,
            points=[PointRecord.from_point(p) for p in points],
            method=method,
            seed=seed,
            version=version,
            **extra,
        )


class QuantumPoint(_Report):
    delay_ps: float
    gamma_delay: float
    corr_re: float
    corr_im: float
    corr_abs: float
    n1: float
    n2: float
    stderr: float
    perturbative: float
    deviation_sigma: float
    within_3sigma: bool
    cauchy_schwarz: bool


class RateRecord(_Report):
    amplitude_rate: float
    amplitude_stderr: float
    population_rate: float
    population_stderr: float
    ratio: float


class QuantumReport(_Report):
    """Stochastic integration against the perturbative correlation."""
    params: Dict[str, Any]
    points: List[QuantumPoint]
    all_within_3sigma: bool
    r_squared: Optional[float] = Field(None, description="Fit quality of corr/corr(0) against exp(-Γτ)")
    rates: Optional[RateRecord] = None
    warnings: List[str] = Field(default_factory=list)
    version: str


class PowerPoint(_Report):
    energy_pj: float
    stokes_photons: float
    excitation_probability: float
    conversion_efficiency: float
    visibility: float
    visibility_stderr: float


class PowerScanReport(_Report):
    """Spontaneous-regime yield linearity and power-independent visibility."""
    delay_ps: float
    slope: float
    slope_stderr: float
    intercept: float
    visibility_spread: float
    points: List[PowerPoint]
    calibration: float
    seed: int
    version: str


class DelayFiles(_Report):
    index: int
    delay_ps: float
    laser: str
    stokes: str


class RunManifest(_Report):
    """What a simulate run wrote, and from which inputs."""
    config_hash: str = Field(..., description="sha256 of the canonical config JSON")
    version: str
    seed: int
    started: str
    finished: str
    workers: int
    files: List[DelayFiles]
    raman_line: Optional[str] = None
    config: Dict[str, Any]


REPORT_MODELS: Dict[str, Type[BaseModel]] = {
    "analysis": AnalysisReport,
    "quantum": QuantumReport,
    "power_scan": PowerScanReport,
    "manifest": RunManifest,
}


def report_schemas() -> Dict[str, Dict[str, Any]]:
    """JSON schema of every report the CLI writes."""
    return {name: model.model_json_schema() for name, model in REPORT_MODELS.items()}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams.update({
        "font.family": "DejaVu Sans",
        "axes.unicode_minus": False,
        "svg.hashsalt": "tcups",
        "svg.fonttype": "none",
    })
    import matplotlib.pyplot as plt

    return plt


def _save_svg(fig, path: Path, provenance: str) -> Path:
    plt = _pyplot()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    text = path.read_text(encoding="utf-8")
    comment = f"<!-- {provenance.replace('--', '- -')} -->\n"
    marker = text.find("?>")
    insert = marker + 3 if text.startswith("<?xml") and marker >= 0 else 0
    path.write_text(text[:insert] + comment + text[insert:], encoding="utf-8")
    return path


def plot_waterfall(
    spectra: Sequence[Tuple[float, np.ndarray, np.ndarray]],
    path: Path,
    provenance: str,
    title: str = "Stokes spectra"
) -> Path:
    """
    Stack normalized spectra vertically, one trace per delay.

    Args:
        spectra: ``(delay_ps, wavelength_nm, counts)`` per delay
        path: Destination SVG
        provenance: Text embedded as an XML comment
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 1.0 + 0.6 * len(spectra)), constrained_layout=True)
    for offset, (delay, wavelength, counts) in enumerate(spectra):
        peak = float(np.max(counts)) or 1.0
        ax.plot(wavelength, np.asarray(counts, dtype=float) / peak + offset, lw=0.6)
        ax.text(wavelength[-1], offset + 0.2, f"{delay:g} ps", fontsize=7, ha="right")
    ax.set_xlabel("Wavelength (nm)")
    ax.set_ylabel("Counts (normalized, offset)")
    ax.set_title(title)
    return _save_svg(fig, Path(path), provenance)


def plot_decay(
    points: Sequence[VisibilityPoint],
    fit: Optional[DecayFitResult],
    path: Path,
    provenance: str
) -> Path:
    """Renormalized visibility against delay with the fitted exponential."""
    plt = _pyplot()
    delays = np.array([p.delay for p in points])
    fig, ax = plt.subplots(figsize=(5, 3.6), constrained_layout=True)
    ax.errorbar(delays, [p.v_norm for p in points], yerr=[p.stderr for p in points], fmt="o", ms=4, label="V")
    if fit is not None:
        tau = np.linspace(0.0, float(delays.max()) * 1.05, 200)
        label = "fit" if fit.lifetime is None else f"fit, 1/Γ = {fit.lifetime:.2f} ps"
        ax.plot(tau, decay_model((fit.v0, fit.gamma), tau), label=label)
    ax.set_xlabel("Delay τ (ps)")
    ax.set_ylabel("Visibility")
    ax.set_ylim(0.0, 1.1)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _save_svg(fig, Path(path), provenance)
