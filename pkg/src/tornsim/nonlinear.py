"""Bilinear convolution term of the momentum equation.

Two interchangeable evaluations of

    B(u, w)(k) = P_k * h^3 * sum_l <l, u(k-l)> w(l),

with l running over lattice points and u read as zero wherever k-l falls
outside the lattice: a zero-padded FFT path for production and a literal
direct summation kept as the verification oracle.

Index convention: with origin = h*m (integer m), k = h*(m+a), l = h*(m+b)
and k-l = h*(m+c) give the slot identity b + c = a - m, so the lattice sum
is a standard linear convolution in index space read off at slot a - m.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.fft import irfftn, next_fast_len, rfftn

from .fields import VectorField, leray_project
from .grid import GridSpec

METHODS = ("fast", "direct")


def _fft_workers() -> int:
    """Worker cap for the FFT backend; TORNADO_THREADS overrides (performance only)."""
    env = os.environ.get("TORNADO_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ConvolutionPlan:
    """Precomputed geometry for evaluating the bilinear term on one grid."""

    grid: GridSpec
    method: str
    padded_shape: tuple[int, int, int] | None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"convolution method must be one of {METHODS}, got {self.method!r}")


def make_plan(grid: GridSpec, method: str = "fast") -> ConvolutionPlan:
    """Build a plan; requires the origin to sit on the h-lattice."""
    grid.require_lattice_offset()
    padded = _padded_shape(grid) if method == "fast" else None
    return ConvolutionPlan(grid, method, padded)


def _padded_shape(grid: GridSpec) -> tuple[int, int, int]:
    # Linear (non-circular) convolution needs >= 2n-1 per axis; round up to
    # FFT-friendly lengths. Rounding affects performance only.
    return tuple(next_fast_len(2 * n - 1) for n in grid.shape)


def _slot_window(grid: GridSpec):
    """Output slices and matching convolution-slot slices, or None if disjoint.

    Slot s = a - m is valid on [0, 2n-2] per axis; output indices outside the
    reachable sumset stay zero.
    """
    m = grid.require_lattice_offset()
    out_sl, slot_sl = [], []
    for d in range(3):
        n = grid.shape[d]
        a_lo = max(0, m[d])
        a_hi = min(n - 1, 2 * n - 2 + m[d])
        if a_lo > a_hi:
            return None
        out_sl.append(slice(a_lo, a_hi + 1))
        slot_sl.append(slice(a_lo - m[d], a_hi - m[d] + 1))
    return tuple(out_sl), tuple(slot_sl)


def _axis_broadcast(grid: GridSpec, d: int) -> np.ndarray:
    ax = grid.axes[d]
    shape = [1, 1, 1]
    shape[d] = ax.size
    return ax.reshape(shape)


def _weighted_sum_fft_general(u: np.ndarray, w: np.ndarray, grid: GridSpec,
                              padded: tuple[int, int, int]) -> np.ndarray:
    """C_e[a] = sum_d ((wav_d * w_e) conv u_d)[a - m] without any solenoidality assumption."""
    workers = _fft_workers()
    win = _slot_window(grid)
    C = np.zeros((3,) + grid.shape)
    if win is None:
        return C
    out_sl, slot_sl = win
    U = [rfftn(u[d], s=padded, workers=workers) for d in range(3)]
    for e in range(3):
        acc = None
        for d in range(3):
            spec = rfftn(_axis_broadcast(grid, d) * w[e], s=padded, workers=workers)
            spec *= U[d]
            acc = spec if acc is None else acc + spec
        ce = irfftn(acc, s=padded, workers=workers)
        C[e][out_sl] = ce[slot_sl]
    return C


def _weighted_sum_fft_solenoidal(v: np.ndarray, grid: GridSpec,
                                 padded: tuple[int, int, int]) -> np.ndarray:
    """Same sum for a solenoidal field, using <l, v(k-l)> = <k, v(k-l)>.

    Valid because <k-l, v(k-l)> vanishes for solenoidal v; the weight then
    depends on the output point only, leaving 6 plain component convolutions
    instead of 9 weighted ones.
    """
    workers = _fft_workers()
    win = _slot_window(grid)
    C = np.zeros((3,) + grid.shape)
    if win is None:
        return C
    out_sl, slot_sl = win
    V = [rfftn(v[d], s=padded, workers=workers) for d in range(3)]
    kb = []
    for d in range(3):
        ax = grid.axes[d][out_sl[d]]
        shape = [1, 1, 1]
        shape[d] = ax.size
        kb.append(ax.reshape(shape))
    for d in range(3):
        for e in range(d, 3):
            t_win = irfftn(V[d] * V[e], s=padded, workers=workers)[slot_sl]
            C[e][out_sl] += kb[d] * t_win
            if e != d:
                C[d][out_sl] += kb[e] * t_win
    return C


def _weighted_sum_direct(u: np.ndarray, w: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Literal O(N^2) gather over (k, l) pairs; the oracle for the FFT paths."""
    m = grid.require_lattice_offset()
    nx, ny, nz = grid.shape
    ax, ay, az = grid.axes
    # u[s-b] = uf[r+b] with r = (n-1) - s, so the inner read is a forward slice.
    uf = u[:, ::-1, ::-1, ::-1]
    out = np.zeros((3, nx, ny, nz))
    for i in range(nx):
        rx = nx - 1 - (i - m[0])
        bx_lo, bx_hi = max(0, -rx), min(nx - 1, nx - 1 - rx)
        if bx_lo > bx_hi:
            continue
        wx = ax[bx_lo:bx_hi + 1][:, None, None]
        for j in range(ny):
            ry = ny - 1 - (j - m[1])
            by_lo, by_hi = max(0, -ry), min(ny - 1, ny - 1 - ry)
            if by_lo > by_hi:
                continue
            wy = ay[by_lo:by_hi + 1][None, :, None]
            for l in range(nz):
                rz = nz - 1 - (l - m[2])
                bz_lo, bz_hi = max(0, -rz), min(nz - 1, nz - 1 - rz)
                if bz_lo > bz_hi:
                    continue
                bs = (slice(bx_lo, bx_hi + 1), slice(by_lo, by_hi + 1),
                      slice(bz_lo, bz_hi + 1))
                us = (slice(rx + bx_lo, rx + bx_hi + 1), slice(ry + by_lo, ry + by_hi + 1),
                      slice(rz + bz_lo, rz + bz_hi + 1))
                s_box = (wx * uf[0][us] + wy * uf[1][us]
                         + az[bz_lo:bz_hi + 1] * uf[2][us])
                for e in range(3):
                    out[e, i, j, l] = np.sum(s_box * w[e][bs])
    return out


def _check_input(v: VectorField, grid: GridSpec) -> None:
    if v.grid != grid:
        raise ValueError("field grid does not match plan grid")
    if not v.is_finite():
        raise ValueError("non-finite values in convolution input")


def weighted_bilinear(u: VectorField, w: VectorField, method: str = "direct",
                      assume_solenoidal: bool = False,
                      padded: tuple[int, int, int] | None = None) -> VectorField:
    """General two-field form P_k h^3 sum_l <l, u(k-l)> w(l).

    ``assume_solenoidal`` enables the cheaper contraction and is only valid
    when both fields are solenoidal and identical (the production step).
    """
    if u.grid != w.grid:
        raise ValueError("u and w must share a grid")
    _check_input(u, u.grid)
    if w is not u:
        _check_input(w, u.grid)
    grid = u.grid
    grid.require_lattice_offset()
    if method == "direct":
        raw = _weighted_sum_direct(u.data, w.data, grid)
    elif method == "fast":
        if padded is None:
            padded = _padded_shape(grid)
        if assume_solenoidal and u is w:
            raw = _weighted_sum_fft_solenoidal(u.data, grid, padded)
        else:
            raw = _weighted_sum_fft_general(u.data, w.data, grid, padded)
    else:
        raise ValueError(f"convolution method must be one of {METHODS}, got {method!r}")
    res = leray_project(VectorField(grid, raw))
    res.data *= grid.cell_volume()
    return res


def bilinear_term(v: VectorField, plan: ConvolutionPlan,
                  assume_solenoidal: bool = False) -> VectorField:
    """B(v) via the plan's method; result is solenoidal by construction."""
    _check_input(v, plan.grid)
    return weighted_bilinear(v, v, method=plan.method,
                             assume_solenoidal=assume_solenoidal,
                             padded=plan.padded_shape)


def bilinear_term_direct(v: VectorField) -> VectorField:
    """Reference direct summation; identical contract, intended for small grids."""
    _check_input(v, v.grid)
    return weighted_bilinear(v, v, method="direct")
