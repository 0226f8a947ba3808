"""Strict readers for the simulator's CSV outputs.

Schemas are enforced exactly: a renamed, missing, or unknown column is an
error, not a warning, so schema drift between the simulator and the figures
is caught at the file boundary.  figgen never recomputes physics; these
readers only parse.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SPECTRUM_HEADER = ["detuning_over_gamma", "re", "im"]
PEAKSCAN_BASE = ["theta_over_pi", "P_1_x_par", "P_1_y_par",
                 "P_2_x_par", "P_2_y_par", "P_2_perp"]
PEAKSCAN_NORM = [f"norm_{name}" for name in PEAKSCAN_BASE[1:]]
HARMONICS_HEADER = ["signal", "n", "A_n", "residual"]


class CsvFormatError(ValueError):
    """The file does not match the expected simulator schema."""


def _read_rows(path) -> tuple[list, list]:
    path = Path(path)
    if not path.exists():
        raise CsvFormatError(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(f"{path}: empty file")
    header, data = rows[0], rows[1:]
    if not data:
        raise CsvFormatError(f"{path}: no data rows")
    return header, data


def _as_floats(path, data, ncols) -> np.ndarray:
    try:
        return np.array([[float(cell) for cell in row] for row in data])
    except (ValueError, IndexError) as exc:
        raise CsvFormatError(f"{path}: malformed numeric row: {exc}") from exc


def read_spectrum(path) -> dict:
    header, data = _read_rows(path)
    if header != SPECTRUM_HEADER:
        raise CsvFormatError(f"{path}: expected columns {SPECTRUM_HEADER}, got {header}")
    values = _as_floats(path, data, 3)
    return {"detuning": values[:, 0], "re": values[:, 1], "im": values[:, 2]}


def read_peakscan(path) -> dict:
    header, data = _read_rows(path)
    if header != PEAKSCAN_BASE and header != PEAKSCAN_BASE + PEAKSCAN_NORM:
        raise CsvFormatError(
            f"{path}: expected columns {PEAKSCAN_BASE} (optionally followed by "
            f"the norm_ columns), got {header}")
    values = _as_floats(path, data, len(header))
    out = {name: values[:, i] for i, name in enumerate(header)}
    out["_has_norm"] = header != PEAKSCAN_BASE
    return out


def read_harmonics(path) -> dict:
    header, data = _read_rows(path)
    if header != HARMONICS_HEADER:
        raise CsvFormatError(f"{path}: expected columns {HARMONICS_HEADER}, got {header}")
    table: dict = {}
    for row in data:
        if len(row) != 4:
            raise CsvFormatError(f"{path}: malformed row {row}")
        signal = row[0]
        try:
            n, a_n, resid = int(row[1]), float(row[2]), float(row[3])
        except ValueError as exc:
            raise CsvFormatError(f"{path}: malformed row {row}: {exc}") from exc
        table.setdefault(signal, {})[n] = (a_n, resid)
    return table
