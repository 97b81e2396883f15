"""Wavenumber lattice geometry shared by every field operation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

Triple = tuple[float, float, float]
IndexTriple = tuple[int, int, int]


@dataclass(frozen=True)
class GridSpec:
    """Uniform truncated wavenumber lattice.

    Point ``(i, j, l)`` sits at ``origin + h * (i, j, l)``. The spacing ``h``
    is shared by all three axes, so every lattice integral carries the single
    scalar quadrature weight ``h**3``.
    """

    nx: int
    ny: int
    nz: int
    h: float
    origin: Triple

    def __post_init__(self) -> None:
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if int(n) != n or n < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {n!r}")
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"h must be positive and finite, got {self.h!r}")
        origin = tuple(float(c) for c in self.origin)
        if len(origin) != 3 or not all(math.isfinite(c) for c in origin):
            raise ValueError(f"origin must be three finite floats, got {self.origin!r}")
        object.__setattr__(self, "origin", origin)

    @classmethod
    def from_domain(cls, lo: Triple, hi: Triple, h: float) -> "GridSpec":
        """Smallest grid with spacing ``h`` anchored at ``lo`` covering ``[lo, hi]``.

        Point counts are rounded up, so ``origin + h*(n-1) >= hi`` holds on
        every axis.
        """
        counts = []
        for a, b in zip(lo, hi):
            if not b > a:
                raise ValueError(f"domain bounds must satisfy lo < hi, got [{a}, {b}]")
            n = max(2, math.ceil((b - a) / h - 1e-12) + 1)
            while a + h * (n - 1) < b - 1e-12 * h:
                n += 1
            counts.append(n)
        return cls(counts[0], counts[1], counts[2], float(h), tuple(lo))

    @property
    def shape(self) -> IndexTriple:
        return (self.nx, self.ny, self.nz)

    @property
    def num_points(self) -> int:
        return self.nx * self.ny * self.nz

    def cell_volume(self) -> float:
        """Quadrature weight h**3 for every lattice sum standing in for an integral."""
        return self.h ** 3

    def axis(self, d: int) -> np.ndarray:
        """1D wavenumber coordinates along axis d (0=x, 1=y, 2=z)."""
        return self.axes[d]

    @cached_property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            self.origin[d] + self.h * np.arange(self.shape[d], dtype=np.float64)
            for d in range(3)
        )

    def wavenumber(self, idx) -> Triple:
        """Wavenumber of lattice index (i, j, l); exact affine arithmetic."""
        i, j, l = idx
        for c, n in zip((i, j, l), self.shape):
            if not 0 <= c < n:
                raise IndexError(f"index {tuple(idx)} outside grid of shape {self.shape}")
        return (
            self.origin[0] + self.h * i,
            self.origin[1] + self.h * j,
            self.origin[2] + self.h * l,
        )

    def index_of(self, k) -> IndexTriple:
        """Inverse of :meth:`wavenumber` by nearest-integer rounding."""
        idx = tuple(int(round((float(c) - o) / self.h)) for c, o in zip(k, self.origin))
        for c, n in zip(idx, self.shape):
            if not 0 <= c < n:
                raise IndexError(f"wavenumber {tuple(k)} outside grid")
        return idx

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k|^2 on the full lattice, shape (nx, ny, nz)."""
        ax, ay, az = self.axes
        return (
            ax[:, None, None] ** 2 + ay[None, :, None] ** 2 + az[None, None, :] ** 2
        )

    @cached_property
    def lattice_offset(self) -> IndexTriple | None:
        """Integer m with origin == h*m, or None if the origin is not on h*Z^3.

        The bilinear convolution works in index space and needs the origin to
        sit on the h-lattice so that differences k-l land back on grid points.
        """
        m = []
        for c in self.origin:
            q = c / self.h
            r = round(q)
            if abs(q - r) > 1e-9:
                return None
            m.append(int(r))
        return tuple(m)

    def require_lattice_offset(self) -> IndexTriple:
        m = self.lattice_offset
        if m is None:
            raise ValueError(
                "grid origin must be an integer multiple of h for convolution "
                f"(origin={self.origin}, h={self.h}); adjust the origin to the "
                "nearest h-multiple"
            )
        return m

    def covers(self, lo: Triple, hi: Triple) -> bool:
        """True if the lattice span contains [lo, hi] on every axis."""
        for d in range(3):
            last = self.origin[d] + self.h * (self.shape[d] - 1)
            if self.origin[d] > lo[d] + 1e-12 or last < hi[d] - 1e-12:
                return False
        return True
