"""Hermite-product initial data: the c0 family the amplitude sweep scales."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fields import VectorField, energy, leray_project
from .grid import GridSpec

CONVENTIONS = ("probabilist", "physicist")


def hermite_function(m: int, x, convention: str = "probabilist"):
    """Hermite function of order m.

    probabilist: He_m(x) * exp(-x^2/4), with He_0=1, He_1=x and
    He_{m+1} = x*He_m - m*He_{m-1}.
    physicist:   H_m(x) * exp(-x^2/2), with H_{m+1} = 2x*H_m - 2m*H_{m-1}.

    Either convention decays super-polynomially; they differ only in scaling.
    """
    if m < 0:
        raise ValueError(f"order must be nonnegative, got {m}")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown Hermite convention {convention!r}")
    x = np.asarray(x, dtype=np.float64)
    if convention == "probabilist":
        prev, cur = np.ones_like(x), x.copy()
        for k in range(1, m):
            prev, cur = cur, x * cur - k * prev
        poly = prev if m == 0 else cur
        weight = np.exp(-0.25 * x * x)
    else:
        prev, cur = np.ones_like(x), 2.0 * x
        for k in range(1, m):
            prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
        poly = prev if m == 0 else cur
        weight = np.exp(-0.5 * x * x)
    return poly * weight


def random_lambda(D: int, seed: int) -> np.ndarray:
    """Reproducible pseudo-random coefficient table, shape (3, 3, D) in [-1, 1]."""
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(3, 3, D))


@dataclass(frozen=True)
class HermiteInitSpec:
    """Parameters of the Hermite-product initial data.

    The raw field is

        v^j(k) = prod_i sum_{m=1..D} lam[i,j,m-1] * He^(m)(3 (k_i - k0_i) / sqrt(R))

    centered at k0 = (0, 0, R). With ``project`` the field is made solenoidal,
    with ``normalize`` it is rescaled to unit norm M = sqrt(E) = 1, and the
    amplitude multiplies the result afterwards so sweeps read M(0) = amplitude.
    """

    R: float
    D: int
    lam: np.ndarray
    amplitude: float = 1.0
    normalize: bool = True
    project: bool = True
    convention: str = "probabilist"
    seed: int | None = None  # provenance of a generated lam table, if any

    def __post_init__(self) -> None:
        if not (math.isfinite(self.R) and self.R > 0):
            raise ValueError(f"R must be positive, got {self.R}")
        if int(self.D) != self.D or self.D < 1:
            raise ValueError(f"D must be an integer >= 1, got {self.D}")
        lam = np.asarray(self.lam, dtype=np.float64)
        if lam.shape != (3, 3, self.D):
            raise ValueError(f"lambda table must have shape (3, 3, {self.D}), got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("lambda table must be finite")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown Hermite convention {self.convention!r}")
        object.__setattr__(self, "lam", lam)

    def with_amplitude(self, a: float) -> "HermiteInitSpec":
        return replace(self, amplitude=float(a))

    @property
    def center(self) -> tuple[float, float, float]:
        return (0.0, 0.0, self.R)


def build_initial_data(spec: HermiteInitSpec, grid: GridSpec) -> VectorField:
    """Evaluate, project and normalize the Hermite-product field on the grid."""
    scale = 3.0 / math.sqrt(spec.R)
    k0 = spec.center
    # axis_sums[i][j]: 1D array over axis i of sum_m lam[i,j,m-1] He^(m)
    axis_sums = []
    for i in range(3):
        arg = scale * (grid.axis(i) - k0[i])
        fns = [hermite_function(m, arg, spec.convention) for m in range(1, spec.D + 1)]
        axis_sums.append(
            [sum(spec.lam[i, j, m] * fns[m] for m in range(spec.D)) for j in range(3)]
        )
    data = np.empty((3,) + grid.shape)
    for j in range(3):
        data[j] = (
            axis_sums[0][j][:, None, None]
            * axis_sums[1][j][None, :, None]
            * axis_sums[2][j][None, None, :]
        )
    v = VectorField(grid, data)
    if spec.project:
        v = leray_project(v)
    if spec.normalize:
        if not np.any(spec.lam):
            raise ValueError("degenerate initial data: all-zero lambda cannot be normalized")
        e0 = energy(v)
        if e0 <= 0.0:
            raise ValueError("degenerate initial data: zero field cannot be normalized")
        v.data /= math.sqrt(e0)
    v.data *= spec.amplitude
    return v
