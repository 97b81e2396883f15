"""On-disk artifacts: binary snapshots, energy CSV traces, slice exports.

All write/read pairs are exact inverses: snapshots round-trip bit-exactly,
the CSV uses shortest decimal representations that re-parse to the same
doubles.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import EnergyTrace, VectorField
from .grid import GridSpec

SNAPSHOT_MAGIC = b"TORN"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIII5d")  # magic, version, nx, ny, nz, h, origin, t

CSV_HEADER = "t,energy,mynorm"


class SnapshotError(Exception):
    """Base class for snapshot format failures."""


class SnapshotMagicError(SnapshotError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotTruncatedError(SnapshotError):
    pass


def write_snapshot(v: VectorField, t: float, path) -> None:
    """Binary snapshot: 60-byte header then (v1, v2, v3) as little-endian f8,
    each component laid out with the z index fastest."""
    g = v.grid
    header = _HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.nx, g.ny, g.nz,
        g.h, g.origin[0], g.origin[1], g.origin[2], float(t),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(v.data, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[VectorField, float]:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise SnapshotTruncatedError(f"{path}: truncated header")
        magic, version, nx, ny, nz, h, ox, oy, oz, t = _HEADER.unpack(header)
        if magic != SNAPSHOT_MAGIC:
            raise SnapshotMagicError(f"{path}: bad magic {magic!r}")
        if version != SNAPSHOT_VERSION:
            raise SnapshotVersionError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = 3 * nx * ny * nz * 8
    if len(payload) != expected:
        raise SnapshotTruncatedError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    grid = GridSpec(nx, ny, nz, h, (ox, oy, oz))
    data = np.frombuffer(payload, dtype="<f8").reshape((3, nx, ny, nz))
    return VectorField(grid, data.astype(np.float64)), t


def format_float(x: float) -> str:
    """Shortest decimal that parses back to the same double; integral values
    drop the trailing '.0'."""
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def write_energy_csv(trace: EnergyTrace, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in trace:
            fh.write(
                f"{format_float(rec.t)},{format_float(rec.energy)},{format_float(rec.mynorm)}\n"
            )


def read_energy_csv(path) -> EnergyTrace:
    trace = EnergyTrace()
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: row 1: expected header '{CSV_HEADER}', got '{header}'")
        for i, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}: row {i}: expected 3 columns, got {len(parts)}")
            try:
                t, e, m = (float(p) for p in parts)
            except ValueError as exc:
                raise ValueError(f"{path}: row {i}: {exc}") from None
            trace.append(t, e, mynorm=m)
    return trace


_AXES = {"x": 0, "y": 1, "z": 2, "0": 0, "1": 1, "2": 2}


def export_slice(v: VectorField, axis, index: int | None = None,
                 span: tuple[int, int] | None = None, path=None) -> tuple[Path, Path, Path]:
    """Plot-ready CSV matrices of |v| and log10|v| over a 2D slice.

    ``index`` picks a single layer; ``span=(lo, hi)`` aggregates layers lo..hi
    (inclusive) by the root of the h-weighted sum of |v|^2. Writes three
    files: the matrix, its log10 companion and a coordinate sidecar.
    """
    if path is None:
        raise ValueError("output path is required")
    d = _AXES.get(str(axis))
    if d is None:
        raise ValueError(f"axis must be one of x/y/z, got {axis!r}")
    if (index is None) == (span is None):
        raise ValueError("exactly one of index or span must be given")
    g = v.grid
    n = g.shape[d]
    mag2 = np.sum(v.data * v.data, axis=0)
    if index is not None:
        if not 0 <= index < n:
            raise ValueError(f"slice index {index} outside axis of length {n}")
        mat = np.sqrt(np.take(mag2, index, axis=d))
        sel_desc = f"index {index} (coordinate {g.axis(d)[index]})"
    else:
        lo, hi = span
        if not (0 <= lo <= hi < n):
            raise ValueError(f"slice range {span} outside axis of length {n}")
        block = np.take(mag2, np.arange(lo, hi + 1), axis=d)
        mat = np.sqrt(g.h * np.sum(block, axis=d))
        sel_desc = f"range {lo}..{hi} (coordinates {g.axis(d)[lo]}..{g.axis(d)[hi]})"

    base = Path(path)
    log_path = base.with_suffix(base.suffix + ".log10.csv") if base.suffix != ".csv" \
        else base.with_name(base.stem + ".log10.csv")
    coords_path = base.with_name((base.stem if base.suffix else base.name) + ".coords.txt")

    rows_axis, cols_axis = [e for e in range(3) if e != d]
    np.savetxt(base, mat, delimiter=",", fmt="%.17g")
    with np.errstate(divide="ignore"):
        logmat = np.log10(np.maximum(mat, np.finfo(float).tiny))
    np.savetxt(log_path, logmat, delimiter=",", fmt="%.17g")
    axis_names = "xyz"
    with open(coords_path, "w", encoding="ascii") as fh:
        fh.write(f"slice axis {axis_names[d]} {sel_desc}\n")
        fh.write(f"rows: axis {axis_names[rows_axis]}: "
                 + " ".join(format_float(c) for c in g.axis(rows_axis)) + "\n")
        fh.write(f"cols: axis {axis_names[cols_axis]}: "
                 + " ".join(format_float(c) for c in g.axis(cols_axis)) + "\n")
    return base, log_path, coords_path
