"""3-component real fields on the lattice: projection, energy, z diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec

#: Relative tolerance used for the solenoidality check |<k,v>| <= tol*|k||v|.
SOLENOIDAL_TOL = 1e-12


@dataclass
class VectorField:
    """Real 3-component field v(k) sampled on a :class:`GridSpec` lattice.

    ``data`` has shape (3, nx, ny, nz), float64, z-index fastest in memory.
    """

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        expected = (3,) + self.grid.shape
        if arr.shape != expected:
            raise ValueError(f"field data must have shape {expected}, got {arr.shape}")
        self.data = np.ascontiguousarray(arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape))

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.data.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))


def heat_decay(grid: GridSpec, t: float) -> np.ndarray:
    """Heat semigroup factor exp(-t |k|^2) on the lattice."""
    return np.exp(-t * grid.k_squared)


def leray_project_point(k, w):
    """Project w onto the plane orthogonal to k: P_k w = w - k <k,w>/|k|^2.

    At k = 0 the projector is taken to be the zero map.
    """
    kx, ky, kz = (float(c) for c in k)
    k2 = kx * kx + ky * ky + kz * kz
    if k2 == 0.0:
        return (0.0, 0.0, 0.0)
    wx, wy, wz = (float(c) for c in w)
    c = (kx * wx + ky * wy + kz * wz) / k2
    return (wx - c * kx, wy - c * ky, wz - c * kz)


def leray_project(v: VectorField) -> VectorField:
    """Pointwise Leray projection of a whole field; output is solenoidal."""
    g = v.grid
    ax, ay, az = g.axes
    kx = ax[:, None, None]
    ky = ay[None, :, None]
    kz = az[None, None, :]
    k2 = g.k_squared
    dot = kx * v.data[0] + ky * v.data[1] + kz * v.data[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(k2 > 0.0, dot / np.where(k2 > 0.0, k2, 1.0), 0.0)
    out = np.empty_like(v.data)
    out[0] = v.data[0] - c * kx
    out[1] = v.data[1] - c * ky
    out[2] = v.data[2] - c * kz
    if np.any(k2 == 0.0):
        # P_0 is the zero map: the k=0 mode carries no velocity information.
        zero = k2 == 0.0
        for d in range(3):
            out[d][zero] = 0.0
    return VectorField(g, out)


def solenoidal_defect(v: VectorField) -> float:
    """max over k != 0 of |<k, v(k)>| / (|k| |v(k)|), ignoring points with v = 0."""
    g = v.grid
    ax, ay, az = g.axes
    dot = (
        ax[:, None, None] * v.data[0]
        + ay[None, :, None] * v.data[1]
        + az[None, None, :] * v.data[2]
    )
    kmag = np.sqrt(g.k_squared)
    vmag = np.sqrt(v.data[0] ** 2 + v.data[1] ** 2 + v.data[2] ** 2)
    denom = kmag * vmag
    mask = denom > 0.0
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(dot[mask]) / denom[mask]))


def energy(v: VectorField) -> float:
    """E = h^3 * sum |v(k)|^2, a plain Riemann sum over the lattice."""
    return float(v.grid.cell_volume() * np.sum(v.data * v.data))


def z_marginal(v: VectorField) -> np.ndarray:
    """Per-layer energy profile e(l) = h^2 * sum_{i,j} |v(i,j,l)|^2.

    Satisfies sum_l e(l)*h == energy(v).
    """
    return v.grid.h ** 2 * np.sum(v.data * v.data, axis=(0, 1, 2))


@dataclass(frozen=True)
class CloudBand:
    """Mass captured near the p-th expected cloud center z = p*R."""

    p: int
    z_center: float
    mass_fraction: float


def detect_clouds(
    profile: np.ndarray,
    grid: GridSpec,
    R: float,
    p_max: int,
    band_width: float = 3.0,
) -> list[CloudBand]:
    """Locate z-localized energy bands near multiples of R.

    For each p in 1..p_max, reports the fraction of the total profile mass in
    the band |z - p*R| <= band_width*sqrt(p*R) and the mass-weighted center of
    that band. Centers of empty bands are NaN.
    """
    prof = np.asarray(profile, dtype=np.float64)
    if prof.size == 0:
        raise ValueError("empty z profile")
    if prof.size != grid.nz:
        raise ValueError(f"profile length {prof.size} does not match nz={grid.nz}")
    if R <= 0:
        raise ValueError("R must be positive")
    z = grid.axis(2)
    total = float(prof.sum())
    bands = []
    for p in range(1, p_max + 1):
        center = p * R
        half = band_width * math.sqrt(p * R)
        sel = np.abs(z - center) <= half
        mass = float(prof[sel].sum())
        frac = mass / total if total > 0.0 else 0.0
        if mass > 0.0:
            z_c = float(np.sum(z[sel] * prof[sel]) / mass)
        else:
            z_c = float("nan")
        bands.append(CloudBand(p, z_c, frac))
    return bands


@dataclass(frozen=True)
class TraceRecord:
    t: float
    energy: float
    mynorm: float


@dataclass
class EnergyTrace:
    """Time series of (t, E, M = sqrt(E)) with strictly increasing t."""

    records: list[TraceRecord] = field(default_factory=list)

    def append(self, t: float, e: float, mynorm: float | None = None) -> TraceRecord:
        if self.records and t <= self.records[-1].t:
            raise ValueError(f"trace times must be strictly increasing, got t={t}")
        if not (math.isfinite(e) and e >= 0.0):
            raise ValueError(f"energy must be finite and nonnegative, got {e}")
        m = math.sqrt(e)
        if mynorm is not None:
            if abs(mynorm * mynorm - e) > 1e-12 * max(e, 1.0):
                raise ValueError(f"mynorm^2 != energy at t={t}")
            m = float(mynorm)
        rec = TraceRecord(float(t), float(e), m)
        self.records.append(rec)
        return rec

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def ts(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def mynorms(self) -> np.ndarray:
        return np.array([r.mynorm for r in self.records])
