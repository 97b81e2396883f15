"""Run configuration files: INI sections [grid], [init], [time], [output].

The lambda table is given explicitly as nine rows lambda_i_j (i, j in 1..3)
of D whitespace-separated coefficients; alternatively lambda_seed generates a
reproducible table. Grids are specified either by explicit counts and origin
(nx/ny/nz/h/x0/y0/z0) or by a covering domain (h plus x_min/x_max/...).
"""

from __future__ import annotations

import configparser
import math

import numpy as np

from .grid import GridSpec
from .hermite import HermiteInitSpec, random_lambda
from .integrator import RunConfig


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; message names the key."""


def _get(cp, section, key, cast, default=None, positive=False):
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"[{section}] missing key '{key}'")
    raw = cp.get(section, key)
    try:
        val = cast(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None
    if positive and not val > 0:
        raise ConfigError(f"[{section}] {key}: must be positive, got {raw}")
    return val


def _get_bool(cp, section, key, default):
    if not cp.has_option(section, key):
        return default
    try:
        return cp.getboolean(section, key)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a boolean") from None


def _parse_grid(cp) -> GridSpec:
    if not cp.has_section("grid"):
        raise ConfigError("missing section [grid]")
    h = _get(cp, "grid", "h", float, positive=True)
    if cp.has_option("grid", "nx"):
        nx = _get(cp, "grid", "nx", int, positive=True)
        ny = _get(cp, "grid", "ny", int, positive=True)
        nz = _get(cp, "grid", "nz", int, positive=True)
        x0 = _get(cp, "grid", "x0", float)
        y0 = _get(cp, "grid", "y0", float)
        z0 = _get(cp, "grid", "z0", float)
        try:
            return GridSpec(nx, ny, nz, h, (x0, y0, z0))
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from None
    bounds = {}
    for key in ("x_min", "x_max", "y_min", "y_max", "z_min", "z_max"):
        bounds[key] = _get(cp, "grid", key, float)
    try:
        return GridSpec.from_domain(
            (bounds["x_min"], bounds["y_min"], bounds["z_min"]),
            (bounds["x_max"], bounds["y_max"], bounds["z_max"]),
            h,
        )
    except ValueError as exc:
        raise ConfigError(f"[grid] {exc}") from None


def _parse_lambda(cp, d: int) -> tuple[np.ndarray, int | None]:
    keys = [(i, j, f"lambda_{i}_{j}") for i in range(1, 4) for j in range(1, 4)]
    present = [k for _, _, k in keys if cp.has_option("init", k)]
    if not present:
        if cp.has_option("init", "lambda_seed"):
            seed = _get(cp, "init", "lambda_seed", int)
            return random_lambda(d, seed), seed
        raise ConfigError(
            "[init] missing lambda table: give nine rows lambda_1_1 .. lambda_3_3 "
            "or a lambda_seed"
        )
    lam = np.empty((3, 3, d))
    for i, j, key in keys:
        if not cp.has_option("init", key):
            raise ConfigError(f"[init] missing key '{key}'")
        raw = cp.get("init", key).split()
        try:
            vals = [float(x) for x in raw]
        except ValueError:
            raise ConfigError(f"[init] {key}: cannot parse coefficients") from None
        if len(vals) != d:
            raise ConfigError(
                f"[init] {key}: expected {d} coefficients (D={d}), got {len(vals)}"
            )
        lam[i - 1, j - 1] = vals
    seed = _get(cp, "init", "lambda_seed", int, default=0) if cp.has_option("init", "lambda_seed") else None
    return lam, seed


def _parse_init(cp) -> HermiteInitSpec:
    if not cp.has_section("init"):
        raise ConfigError("missing section [init]")
    r = _get(cp, "init", "R", float, positive=True)
    d = _get(cp, "init", "D", int, positive=True)
    lam, seed = _parse_lambda(cp, d)
    amplitude = _get(cp, "init", "amplitude", float, default=1.0)
    if not math.isfinite(amplitude):
        raise ConfigError("[init] amplitude: must be finite")
    normalize = _get_bool(cp, "init", "normalize", True)
    project = _get_bool(cp, "init", "project", True)
    convention = cp.get("init", "hermite_convention", fallback="probabilist").strip()
    try:
        return HermiteInitSpec(
            R=r, D=d, lam=lam, amplitude=amplitude, normalize=normalize,
            project=project, convention=convention, seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"[init] {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a fully validated RunConfig."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    grid = _parse_grid(cp)
    init = _parse_init(cp)
    if not cp.has_section("time"):
        raise ConfigError("missing section [time]")
    dt = _get(cp, "time", "dt", float, positive=True)
    t_max = _get(cp, "time", "t_max", float, positive=True)
    threshold = _get(cp, "time", "blowup_threshold", float, default=1e4)
    if not threshold > 1:
        raise ConfigError("[time] blowup_threshold: must exceed 1")
    method = cp.get("time", "method", fallback="fast").strip()
    if method not in ("fast", "direct"):
        raise ConfigError(f"[time] method: must be 'fast' or 'direct', got {method!r}")
    out_dir = cp.get("output", "out_dir", fallback=None)
    snapshot_every = _get(cp, "output", "snapshot_every", int, default=0) \
        if cp.has_section("output") else 0
    if snapshot_every < 0:
        raise ConfigError("[output] snapshot_every: must be >= 0")
    try:
        return RunConfig(
            grid=grid, init=init, dt=dt, t_max=t_max,
            snapshot_every=snapshot_every, blowup_threshold=threshold,
            method=method, out_dir=out_dir,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
