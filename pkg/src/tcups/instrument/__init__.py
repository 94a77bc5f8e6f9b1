"""
Spectrometer resolution, CCD pixels, photon counting and spectra files.
"""
from .detector import (
    GRATING_DEFAULTS,
    CountsSpectrum,
    InstrumentModel,
    NoiseMode,
    apply_counting,
    channel_visibility_factor,
    convolve_response,
    gaussian_visibility_factor,
    pixel_bin,
    pixel_visibility_factor,
)
from .io import atomic_write, read_counts_csv, write_counts_csv, write_json

__all__ = [
    'GRATING_DEFAULTS',
    'CountsSpectrum',
    'InstrumentModel',
    'NoiseMode',
    'apply_counting',
    'channel_visibility_factor',
    'convolve_response',
    'gaussian_visibility_factor',
    'pixel_bin',
    'pixel_visibility_factor',
    'atomic_write',
    'read_counts_csv',
    'write_counts_csv',
    'write_json',
]
