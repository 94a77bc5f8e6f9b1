"""
Exception hierarchy for the tcups package.
"""


class TcupsError(Exception):
    """Base class for every error raised by tcups."""


class DomainError(TcupsError, ValueError):
    """An argument lies outside the domain of a physical relation."""


class SpectrumError(TcupsError, ValueError):
    """A spectrum violates its grid or intensity invariants."""


class GridError(TcupsError):
    """The sampling grid is too narrow or too coarse for the requested pulse."""


class SamplingError(TcupsError):
    """Pixel pitch or grid pitch cannot resolve the fringes."""


class KernelError(TcupsError):
    """Instrument response kernel does not fit on the grid."""


class NoSidebandError(TcupsError):
    """No fringe sideband rises above the noise floor near the expected delay."""


class LaserVisibilityError(TcupsError):
    """Laser visibility too low to renormalize against."""


class FitError(TcupsError):
    """A least-squares fit failed to converge."""


class InsufficientPointsError(FitError):
    """Not enough distinct points to constrain a fit."""


class StepSizeError(TcupsError):
    """Integrator step does not resolve the pump duration or the decay time."""


class MissingPairError(TcupsError):
    """A spectra directory lacks matched laser/Stokes files."""


class PeakNotFoundError(FitError):
    """No line rises far enough above the baseline noise to fit."""


class ConfigError(TcupsError, ValueError):
    """A run configuration file cannot be parsed or validated."""


class ScanRangeError(TcupsError, ValueError):
    """A power scan has too few energies or too narrow a span."""
