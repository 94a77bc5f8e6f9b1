"""
Visibility extraction, decay and lineshape fits, and reports.
"""
from .fitting import (
    DecayFitResult,
    ExponentialFit,
    LorentzianFit,
    ReconcileReport,
    fit_decay,
    fit_exponential,
    fit_lorentzian,
    reconcile,
)
from .visibility import (
    VisibilityEstimate,
    VisibilityMethod,
    VisibilityPoint,
    extract_visibility,
    measure_fringe_spacing,
    renormalize,
)
from .report import (
    AnalysisReport,
    PowerScanReport,
    QuantumReport,
    RunManifest,
    plot_decay,
    plot_waterfall,
    report_schemas,
)

__all__ = [
    'DecayFitResult',
    'ExponentialFit',
    'LorentzianFit',
    'ReconcileReport',
    'fit_decay',
    'fit_exponential',
    'fit_lorentzian',
    'reconcile',
    'VisibilityEstimate',
    'VisibilityMethod',
    'VisibilityPoint',
    'extract_visibility',
    'measure_fringe_spacing',
    'renormalize',
    'AnalysisReport',
    'PowerScanReport',
    'QuantumReport',
    'RunManifest',
    'plot_decay',
    'plot_waterfall',
    'report_schemas',
]
