"""
CSV and JSON files for counts spectra and reports.

Every write goes to a temporary file in the target directory and is moved
into place with ``os.replace``, so readers never see a partial file.
"""
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, TextIO, Union

import pandas as pd

from ..errors import SpectrumError
from ..models.classical import AxisKind
from .detector import CountsSpectrum

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

AXIS_COLUMNS = {
    AxisKind.WAVELENGTH: "wavelength_nm",
    AxisKind.WAVENUMBER: "wavenumber_cm_inv",
    AxisKind.FREQUENCY: "frequency_thz",
}
COUNTS_COLUMN = "counts"


@contextmanager
def atomic_write(path: PathLike) -> Iterator[TextIO]:
    """Open a temporary sibling of ``path`` for writing and rename it over ``path`` on success."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            yield handle
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_counts_csv(path: PathLike, spectrum: CountsSpectrum) -> Path:
    """
    Write a counts spectrum as ``<axis>,counts`` CSV.

    Integer counts are written as integers; mean counts keep full double
    precision (shortest round-trip repr).
    """
    path = Path(path)
    frame = pd.DataFrame({
        AXIS_COLUMNS[spectrum.axis]: spectrum.bins,
        COUNTS_COLUMN: spectrum.counts,
    })
    with atomic_write(path) as handle:
        frame.to_csv(handle, index=False, lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} pixels to {path}")
    return path


def read_counts_csv(path: PathLike, exposure: int = 1) -> CountsSpectrum:
    """
    Read a CSV written by :func:`write_counts_csv`.

    The axis is taken from the header; values come back bit-identical.
    """
    path = Path(path)
    frame = pd.read_csv(path, float_precision="round_trip")
    columns = list(frame.columns)
    if len(columns) != 2 or columns[1] != COUNTS_COLUMN:
        raise SpectrumError(f"{path}: expected header '<axis>,{COUNTS_COLUMN}', got {','.join(columns)}")
    axes = {column: axis for axis, column in AXIS_COLUMNS.items()}
    if columns[0] not in axes:
        raise SpectrumError(f"{path}: unknown axis column '{columns[0]}'")
    return CountsSpectrum(
        bins=frame[columns[0]].to_numpy(dtype=float),
        counts=frame[COUNTS_COLUMN].to_numpy(),
        exposure=exposure,
        axis=axes[columns[0]],
    )


def write_json(path: PathLike, payload: Any) -> Path:
    """Write ``payload`` as indented, key-sorted JSON with a trailing newline."""
    path = Path(path)
    with atomic_write(path) as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path
