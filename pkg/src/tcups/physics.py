"""
Physical constants, unit conversions and closed-form scalar relations.

Wavelengths are in nm, wavenumbers in cm^-1, optical frequencies in THz,
times in ps and dephasing rates in ps^-1. ``gamma`` is always the amplitude
dephasing rate; linewidths are FWHM with Δν = Γ/π.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field
from scipy import constants as _codata

from .errors import DomainError


@dataclass(frozen=True)
class PhysConstants:
    """CODATA values (SI) as shipped with scipy.constants."""
    speed_of_light: float = _codata.c
    boltzmann: float = _codata.k
    planck: float = _codata.h

    @property
    def c_nm_thz(self) -> float:
        """Speed of light in nm·THz (λ[nm] · f[THz])."""
        return self.speed_of_light * 1e-3

    @property
    def c_cm_per_ps(self) -> float:
        """Speed of light in cm/ps."""
        return self.speed_of_light * 100.0 * 1e-12

    @property
    def boltzmann_cm_inv(self) -> float:
        """Boltzmann constant in cm^-1 per kelvin."""
        return self.boltzmann / (self.planck * self.speed_of_light * 100.0)


CONSTANTS = PhysConstants()


class SpectralUnit(str, Enum):
    NM = "nm"
    CM_INV = "cm-1"
    THZ = "THz"
    PS = "ps"


def nm_to_cm_inv(wavelength: float) -> float:
    return 1e7 / wavelength


def cm_inv_to_nm(wavenumber: float) -> float:
    return 1e7 / wavenumber


def nm_to_thz(wavelength: float) -> float:
    return CONSTANTS.c_nm_thz / wavelength


def thz_to_nm(frequency: float) -> float:
    return CONSTANTS.c_nm_thz / frequency


def thz_to_cm_inv(frequency: float) -> float:
    return frequency / (CONSTANTS.c_cm_per_ps)


def cm_inv_to_thz(wavenumber: float) -> float:
    return wavenumber * CONSTANTS.c_cm_per_ps


_TO_THZ = {
    SpectralUnit.NM: nm_to_thz,
    SpectralUnit.CM_INV: cm_inv_to_thz,
    SpectralUnit.THZ: lambda value: value,
    SpectralUnit.PS: lambda value: 1.0 / value,
}

_FROM_THZ = {
    SpectralUnit.NM: thz_to_nm,
    SpectralUnit.CM_INV: thz_to_cm_inv,
    SpectralUnit.THZ: lambda value: value,
    SpectralUnit.PS: lambda value: 1.0 / value,
}


@dataclass(frozen=True)
class SpectralQuantity:
    """
    A positive spectral position in one of nm, cm^-1, THz or ps.

    ``ps`` is the optical period, so every unit converts to every other one
    through the optical frequency.
    """
    value: float
    unit: SpectralUnit

    def __post_init__(self):
        object.__setattr__(self, "unit", SpectralUnit(self.unit))
        if not math.isfinite(self.value) or self.value <= 0:
            raise DomainError(f"spectral quantity must be positive and finite, got {self.value} {self.unit.value}")

    def to(self, unit: SpectralUnit) -> "SpectralQuantity":
        unit = SpectralUnit(unit)
        if unit is self.unit:
            return self
        frequency = _TO_THZ[self.unit](self.value)
        return SpectralQuantity(_FROM_THZ[unit](frequency), unit)


class MaterialParams(BaseModel):
    """Raman-active material; defaults are bulk type Ib diamond."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    raman_shift: float = Field(1332.0, gt=0, description="Raman shift (cm^-1)")
    gamma: float = Field(1.0 / 6.8, gt=0, description="Amplitude dephasing rate Γ (ps^-1)")
    raman_gain: float = Field(7.4e-3, gt=0, description="Raman gain coefficient (cm/MW)")
    vibrational_energy: float = Field(1332.0, gt=0, description="Phonon energy E_vib (cm^-1)")


DIAMOND = MaterialParams()

# Fitted to the 1.1 pJ -> 0.004 and 380 pJ -> 1.3 photons/pulse endpoints.
DEFAULT_YIELD_CALIBRATION = 0.0035

# Phonon modes within the collinear detection cone.
DEFAULT_DETECTED_MODES = 1e5


def stokes_wavelength(pump: float, shift: float) -> float:
    """
    Wavelength of the first Stokes line.

    Args:
        pump: Pump wavelength (nm)
        shift: Raman shift (cm^-1)

    Returns:
        Stokes wavelength (nm), 1e7 / (1e7/pump - shift)
    """
    if pump <= 0:
        raise DomainError(f"pump wavelength must be positive, got {pump}")
    pump_wavenumber = nm_to_cm_inv(pump)
    if shift >= pump_wavenumber:
        raise DomainError(f"shift {shift} cm^-1 exceeds the pump wavenumber {pump_wavenumber:.2f} cm^-1")
    return cm_inv_to_nm(pump_wavenumber - shift)


def fringe_spacing(center: float, delay: float) -> float:
    """Spectral fringe spacing λ²/(cτ) in nm for two pulses ``delay`` ps apart."""
    if delay <= 0:
        raise DomainError(f"delay must be positive, got {delay}")
    if center <= 0:
        raise DomainError(f"center wavelength must be positive, got {center}")
    return center ** 2 / (CONSTANTS.c_nm_thz * delay)


def thermal_population(e_vib: float, temperature: float) -> float:
    """Bose-Einstein occupation [exp(E_vib / k_B T) - 1]^-1."""
    if temperature <= 0:
        raise DomainError(f"temperature must be positive, got {temperature}")
    if e_vib <= 0:
        raise DomainError(f"vibrational energy must be positive, got {e_vib}")
    x = e_vib / (CONSTANTS.boltzmann_cm_inv * temperature)
    return 1.0 / math.expm1(x)


def lifetime_linewidth(gamma: float) -> float:
    """FWHM linewidth Δν = Γ/π in cm^-1 for an amplitude dephasing rate in ps^-1."""
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    return gamma / (math.pi * CONSTANTS.c_cm_per_ps)


def linewidth_lifetime(linewidth: float) -> float:
    """Inverse of :func:`lifetime_linewidth`: dephasing rate in ps^-1."""
    if linewidth <= 0:
        raise DomainError(f"linewidth must be positive, got {linewidth}")
    return linewidth * math.pi * CONSTANTS.c_cm_per_ps


def q_factor(nu: float, gamma: float) -> float:
    """Phonon Q = ν/Γ with Γ expressed in cm^-1 (π·Δν)."""
    if nu <= 0:
        raise DomainError(f"frequency must be positive, got {nu}")
    gamma_cm = math.pi * lifetime_linewidth(gamma)
    return nu / gamma_cm


def stokes_yield(pulse_energy: float, cal: float = DEFAULT_YIELD_CALIBRATION) -> float:
    """
    Collinear Stokes photons per pump pulse in the spontaneous regime.

    Args:
        pulse_energy: Pump pulse energy (pJ)
        cal: Calibration (photons per pJ)

    Returns:
        cal * pulse_energy
    """
    if pulse_energy < 0:
        raise DomainError(f"pulse energy must be non-negative, got {pulse_energy}")
    if cal <= 0:
        raise DomainError(f"calibration must be positive, got {cal}")
    return cal * pulse_energy


def stokes_yield_estimate(
    gain: float,
    peak_intensity: float,
    length: float,
    modes: float = 1.0
) -> float:
    """
    Order-of-magnitude spontaneous Stokes photon number from the Raman gain.

    Vacuum-seeded emission into ``modes`` collinear modes, each amplified by
    exp(g·I·L) - 1. Not used by the simulation; :func:`stokes_yield` with a
    calibration constant is.

    Args:
        gain: Raman gain coefficient (cm/MW)
        peak_intensity: Peak pump intensity (MW/cm^2)
        length: Interaction length (cm)
        modes: Number of detected Stokes modes
    """
    if min(gain, peak_intensity, length, modes) < 0:
        raise DomainError("gain, intensity, length and modes must be non-negative")
    return modes * math.expm1(gain * peak_intensity * length)


def pump_photon_number(energy: float, wavelength: float) -> float:
    """Photons in a pulse of ``energy`` pJ at ``wavelength`` nm."""
    if wavelength <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    if energy < 0:
        raise DomainError(f"energy must be non-negative, got {energy}")
    photon_energy = CONSTANTS.planck * CONSTANTS.speed_of_light / (wavelength * 1e-9)
    return energy * 1e-12 / photon_energy


def excitation_probability(photons: float, modes: float = DEFAULT_DETECTED_MODES) -> float:
    """Phonon excitation probability per mode, one phonon per Stokes photon."""
    if modes <= 0:
        raise DomainError(f"mode count must be positive, got {modes}")
    return photons / modes


def conversion_efficiency(photons: float, pump_energy: float, stokes_wavelength_nm: float) -> float:
    """Fraction of pump energy carried by the Stokes photons."""
    if pump_energy <= 0:
        raise DomainError(f"pump energy must be positive, got {pump_energy}")
    stokes_energy_pj = photons / pump_photon_number(1.0, stokes_wavelength_nm)
    return stokes_energy_pj / pump_energy


def constants_reference(material: MaterialParams = DIAMOND) -> str:
    """Markdown reference page for the constants and material defaults."""
    rows: List[Dict[str, str]] = [
        {"name": "speed_of_light", "value": f"{CONSTANTS.speed_of_light!r}", "unit": "m/s"},
        {"name": "boltzmann", "value": f"{CONSTANTS.boltzmann!r}", "unit": "J/K"},
        {"name": "planck", "value": f"{CONSTANTS.planck!r}", "unit": "J s"},
        {"name": "boltzmann_cm_inv", "value": f"{CONSTANTS.boltzmann_cm_inv:.10g}", "unit": "cm^-1/K"},
        {"name": "raman_shift", "value": f"{material.raman_shift:g}", "unit": "cm^-1"},
        {"name": "gamma", "value": f"{material.gamma:.10g}", "unit": "ps^-1"},
        {"name": "lifetime", "value": f"{1.0 / material.gamma:.6g}", "unit": "ps"},
        {"name": "linewidth", "value": f"{lifetime_linewidth(material.gamma):.6g}", "unit": "cm^-1 FWHM"},
        {"name": "q_factor", "value": f"{q_factor(material.raman_shift, material.gamma):.6g}", "unit": ""},
        {"name": "raman_gain", "value": f"{material.raman_gain:g}", "unit": "cm/MW"},
        {"name": "thermal_population_300K", "value": f"{thermal_population(material.vibrational_energy, 300.0):.4g}", "unit": ""},
        {"name": "yield_calibration", "value": f"{DEFAULT_YIELD_CALIBRATION:g}", "unit": "photons/pJ"},
    ]
    lines = ["| name | value | unit |", "|---|---|---|"]
    lines.extend(f"| {row['name']} | {row['value']} | {row['unit']} |" for row in rows)
    return "\n".join(lines) + "\n"
