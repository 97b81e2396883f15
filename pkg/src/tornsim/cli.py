"""Command-line driver: run, sweep, series-check, fit, slice, clouds."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .fields import VectorField, detect_clouds, energy, z_marginal
from .integrator import fit_blowup, run, sweep
from .series import compute_series, series_solution
from .storage import (
    SnapshotError,
    export_slice,
    format_float,
    read_energy_csv,
    read_snapshot,
    write_energy_csv,
    write_snapshot,
)


def _out_dir(args, cfg, config_path) -> Path:
    out = args.out or cfg.out_dir or (Path(config_path).stem + "_out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg, args.config)
    result = run(cfg)
    write_energy_csv(result.trace, out / "trace.csv")
    for t, snap in result.snapshots:
        write_snapshot(snap, t, out / f"snapshot_t{t:.6f}.torn")
    last = result.trace[-1]
    print(f"outcome: {result.outcome}")
    print(f"t_end: {format_float(result.t_end)}  mynorm: {format_float(last.mynorm)}")
    print(f"trace: {out / 'trace.csv'} ({len(result.trace)} records)")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.amin <= 0 or args.amax < args.amin or args.steps < 1:
        raise ConfigError("sweep needs 0 < amin <= amax and steps >= 1")
    if args.steps == 1:
        amps = [args.amin]
    else:
        amps = list(np.geomspace(args.amin, args.amax, args.steps))
    result = sweep(cfg, amps, bisect=args.bisect)
    for row in result.rows + result.bisect_rows:
        t_cr = f"  t_cr={format_float(row.t_cr)}" if row.t_cr is not None else ""
        print(f"A={format_float(row.amplitude)}  {row.outcome}{t_cr}")
    if result.bracket:
        lo, hi = result.bracket
        print(f"threshold bracket: [{format_float(lo)}, {format_float(hi)}] "
              f"(rel width {format_float(hi / lo - 1.0)})")
    return 0


def _cmd_series_check(args) -> int:
    cfg = load_config(args.config)
    amps = [float(a) for a in args.amplitudes.split(",") if a]
    if not amps:
        raise ConfigError("--amplitudes needs at least one value")
    c0 = run_free_initial(cfg)
    series = compute_series(c0, cfg.t_max, num_samples=args.samples,
                            p_max=args.pmax, method=args.method)
    lines = ["amplitude,mynorm_integrator,mynorm_series,abs_discrepancy,rel_discrepancy"]
    discs = []
    for a in amps:
        res = run(cfg.with_amplitude(a), keep_snapshots=True)
        v_int = res.snapshots[-1][1]
        v_ser = series_solution(series, a, res.t_end, args.pmax)
        diff = VectorField(cfg.grid, v_int.data - v_ser.data)
        d = math.sqrt(energy(diff))
        ni, ns = math.sqrt(energy(v_int)), math.sqrt(energy(v_ser))
        discs.append(d)
        lines.append(",".join(format_float(x) for x in (a, ni, ns, d, d / ni if ni else 0.0)))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
        print(f"report: {args.out}")
    else:
        sys.stdout.write(text)
    for (a1, d1), (a2, d2) in zip(zip(amps, discs), zip(amps[1:], discs[1:])):
        if d2 > 0:
            print(f"discrepancy ratio {format_float(a1)} -> {format_float(a2)}: "
                  f"{format_float(d1 / d2)}")
    return 0


def run_free_initial(cfg):
    """Normalized c0 (amplitude 1) used as the series seed."""
    from .hermite import build_initial_data

    return build_initial_data(cfg.init.with_amplitude(1.0), cfg.grid)


def _cmd_fit(args) -> int:
    trace = read_energy_csv(args.trace)
    fit = fit_blowup(trace, tail_fraction=args.tail)
    print(f"alpha = {fit.alpha:.4f}")
    print(f"t_cr = {format_float(fit.t_cr)}")
    print(f"window = [{format_float(fit.window[0])}, {format_float(fit.window[1])}]")
    print(f"residual = {format_float(fit.residual)}")
    return 0


def _parse_span(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def _cmd_slice(args) -> int:
    v, t = read_snapshot(args.snapshot)
    out = args.out or str(Path(args.snapshot).with_suffix(".slice.csv"))
    if args.at is not None:
        paths = export_slice(v, args.axis, index=args.at, path=out)
    elif args.range is not None:
        paths = export_slice(v, args.axis, span=_parse_span(args.range), path=out)
    else:
        raise ConfigError("slice needs --at or --range")
    print(f"snapshot time: {format_float(t)}")
    for p in paths:
        print(p)
    return 0


def _cmd_clouds(args) -> int:
    v, t = read_snapshot(args.snapshot)
    profile = z_marginal(v)
    bands = detect_clouds(profile, v.grid, args.R, args.pmax, band_width=args.band_width)
    print(f"snapshot time: {format_float(t)}")
    print("p,z_center,mass_fraction")
    for band in bands:
        center = format_float(band.z_center) if not math.isnan(band.z_center) else "nan"
        print(f"{band.p},{center},{format_float(band.mass_fraction)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tornsim",
        description="Fourier-space simulator for tornado-type blow-up runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a configuration, write trace and snapshots")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default from config)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="classify amplitudes as decay or blow-up")
    p.add_argument("config")
    p.add_argument("--amin", type=float, required=True)
    p.add_argument("--amax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--bisect", action="store_true",
                   help="refine the threshold bracket after the ladder")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("series-check", help="compare integrator against the power series")
    p.add_argument("config")
    p.add_argument("--pmax", type=int, default=3)
    p.add_argument("--amplitudes", required=True, help="comma-separated amplitudes")
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--method", choices=("direct", "fast"), default="direct")
    p.add_argument("--out", help="write the CSV report here instead of stdout")
    p.set_defaults(fn=_cmd_series_check)

    p = sub.add_parser("fit", help="fit the blow-up exponent of an energy trace")
    p.add_argument("trace")
    p.add_argument("--tail", type=float, default=0.5,
                   help="fraction of the growth segment to fit (default 0.5)")
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("slice", help="export |v| matrices from a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--axis", required=True, choices=("x", "y", "z"))
    p.add_argument("--at", type=int, help="single layer index")
    p.add_argument("--range", help="aggregated layer range lo:hi")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(fn=_cmd_slice)

    p = sub.add_parser("clouds", help="report z-band structure of a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--pmax", type=int, default=4)
    p.add_argument("--band-width", type=float, default=3.0)
    p.set_defaults(fn=_cmd_clouds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, SnapshotError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
