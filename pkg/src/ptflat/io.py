"""Flat-file formats written by the CLI.

All floats are written with 15 significant digits and negative zero is
folded to zero, so identical inputs give byte-identical files.

CSV schemas
-----------
bands       k, band_index, re, im
spectrum    index, re, im
state       cell, site, re, im
trajectory  t, cell, site, intensity
matrix      one row per matrix row, cells "re,im" (quoted)

The binary matrix format is row-major little-endian float64 pairs
(re, im), no header; the dimension is ``sqrt(n_bytes / 16)``.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .lattice import SITE_NAMES

SCHEMA_VERSION = 1


def fmt(x) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0
    return format(x, ".15g")


def _clean(obj, exact=False):
    """Make values JSON-friendly with deterministic float text.

    ``exact`` keeps the shortest round-trip repr instead of 15 digits.
    """
    if isinstance(obj, dict):
        return {str(k): _clean(v, exact) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, exact) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist(), exact)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real, exact), "im": _clean(obj.imag, exact)}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return x if exact else float(fmt(x))
    if hasattr(obj, "value"):
        return obj.value
    return obj


def write_json(path: Path, payload: dict, exact: bool = False) -> Path:
    path = Path(path)
    body = {"schema_version": SCHEMA_VERSION}
    body.update(payload)
    path.write_text(json.dumps(_clean(body, exact), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def _write_rows(path: Path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_bands_csv(path, bs) -> Path:
    rows = ((fmt(k), b, fmt(e.real), fmt(e.imag))
            for k, row in zip(bs.k, bs.energies) for b, e in enumerate(row))
    return _write_rows(path, ("k", "band_index", "re", "im"), rows)


def write_spectrum_csv(path, values) -> Path:
    rows = ((i, fmt(e.real), fmt(e.imag)) for i, e in enumerate(values))
    return _write_rows(path, ("index", "re", "im"), rows)


def write_state_csv(path, state) -> Path:
    cells = state.cells()
    rows = ((j + 1, SITE_NAMES[s], fmt(cells[j, s].real), fmt(cells[j, s].imag))
            for j in range(cells.shape[0]) for s in range(3))
    return _write_rows(path, ("cell", "site", "re", "im"), rows)


def read_state_csv(path) -> np.ndarray:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    n = max(int(r["cell"]) for r in rows)
    amps = np.zeros(3 * n, dtype=complex)
    for r in rows:
        i = 3 * (int(r["cell"]) - 1) + SITE_NAMES.index(r["site"])
        amps[i] = float(r["re"]) + 1j * float(r["im"])
    return amps


def write_trajectory_csv(path, traj) -> Path:
    n = traj.n_cells

    def rows():
        for t, inten in zip(traj.times, traj.intensities):
            for j in range(n):
                for s in range(3):
                    yield fmt(t), j + 1, SITE_NAMES[s], fmt(inten[3 * j + s])

    return _write_rows(path, ("t", "cell", "site", "intensity"), rows())


def write_matrix_csv(path, matrix) -> Path:
    matrix = np.asarray(matrix, dtype=complex)
    rows = ([f"{fmt(z.real)},{fmt(z.imag)}" for z in row] for row in matrix)
    path = Path(path)
    with path.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_ALL).writerows(rows)
    return path


def read_matrix_csv(path) -> np.ndarray:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    return np.array([[complex(*map(float, cell.split(","))) for cell in row] for row in rows])


def write_matrix_bin(path, matrix) -> Path:
    matrix = np.ascontiguousarray(matrix, dtype=complex)
    pairs = np.stack([matrix.real, matrix.imag], axis=-1).astype("<f8")
    path = Path(path)
    path.write_bytes(pairs.tobytes(order="C"))
    return path


def read_matrix_bin(path) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f8")
    n = int(round(math.sqrt(raw.size // 2)))
    if 2 * n * n != raw.size:
        raise ValueError(f"{path}: {raw.size} floats is not a square complex matrix")
    pairs = raw.reshape(n, n, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]
