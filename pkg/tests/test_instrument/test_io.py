"""
Tests for the spectrum and report files.
"""
import json

import numpy as np
import pytest

from tcups.errors import SpectrumError
from tcups.instrument import CountsSpectrum, atomic_write, read_counts_csv, write_counts_csv, write_json
from tcups.models import AxisKind


def test_integer_counts_file_layout(tmp_path):
    """Test the header and integer formatting of a counts CSV."""
    spectrum = CountsSpectrum(np.array([880.0, 880.025, 880.05]), np.array([3, 0, 12]))
    path = write_counts_csv(tmp_path / "stokes.csv", spectrum)

    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "wavelength_nm,counts"
    assert lines[1] == "880.0,3"
    assert lines[3].endswith(",12")
    assert lines[-1] == ""


def test_counts_read_back_bit_identical(tmp_path):
    """Test that bins and float counts survive the file unchanged."""
    bins = 880.0 + 0.025 * np.arange(50)
    counts = np.random.default_rng(0).random(50) * 1e3
    path = write_counts_csv(tmp_path / "mean.csv", CountsSpectrum(bins, counts))
    back = read_counts_csv(path, exposure=7)

    np.testing.assert_array_equal(back.bins, bins)
    np.testing.assert_array_equal(back.counts, counts)
    assert back.exposure == 7
    assert back.axis is AxisKind.WAVELENGTH


def test_integer_counts_read_back_as_integers(tmp_path):
    """Test that integer counts stay integer."""
    path = write_counts_csv(tmp_path / "int.csv", CountsSpectrum(np.linspace(1.0, 2.0, 4), np.array([1, 2, 3, 4])))
    assert read_counts_csv(path).is_integer


def test_wavenumber_axis_round_trip(tmp_path):
    """Test that the axis is recovered from the header."""
    spectrum = CountsSpectrum(np.linspace(1312.0, 1352.0, 9), np.arange(9), axis=AxisKind.WAVENUMBER)
    path = write_counts_csv(tmp_path / "line.csv", spectrum)

    assert path.read_text(encoding="utf-8").startswith("wavenumber_cm_inv,counts\n")
    assert read_counts_csv(path).axis is AxisKind.WAVENUMBER


@pytest.mark.parametrize("header", ["wavelength_nm,intensity", "time_ps,counts", "wavelength_nm,counts,extra"])
def test_read_rejects_unknown_header(tmp_path, header):
    """Test that files with an unexpected header are refused."""
    columns = header.count(",") + 1
    path = tmp_path / "bad.csv"
    path.write_text(header + "\n" + ",".join(["1"] * columns) + "\n" + ",".join(["2"] * columns) + "\n")

    with pytest.raises(SpectrumError):
        read_counts_csv(path)


def test_write_json_sorted_with_newline(tmp_path):
    """Test the JSON layout."""
    path = write_json(tmp_path / "report.json", {"b": 1, "a": [1.5, None]})
    text = path.read_text(encoding="utf-8")

    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.5, None], "b": 1}


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    """Test that a failed write neither creates the target nor leaves a temporary file."""
    target = tmp_path / "out.csv"
    with pytest.raises(RuntimeError):
        with atomic_write(target) as handle:
            handle.write("partial")
            raise RuntimeError("boom")

    assert list(tmp_path.iterdir()) == []


def test_atomic_write_replaces_existing(tmp_path):
    """Test that a successful write replaces the old file."""
    target = tmp_path / "out.txt"
    target.write_text("old")
    with atomic_write(target) as handle:
        handle.write("new")

    assert target.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
