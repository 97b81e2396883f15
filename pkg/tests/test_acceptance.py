"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 7-9 share two desk-scale runs (several minutes each); they are
module-scoped fixtures so the expensive integrations happen once. Run with
``pytest tests/test_acceptance.py -s`` to see the per-criterion lines.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

import tornsim as ts
from tornsim import (
    EnergyTrace,
    GridSpec,
    HermiteInitSpec,
    RunConfig,
    VectorField,
    bilinear_term,
    bilinear_term_direct,
    build_initial_data,
    detect_clouds,
    energy,
    fit_blowup,
    heat_decay,
    leray_project,
    make_plan,
    run,
    series_solution,
    step,
    z_marginal,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def report(num, ok, detail):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def enorm(grid, data):
    return math.sqrt(grid.cell_volume() * float(np.sum(data * data)))


class TestCriterion1:
    def test_convolution_oracle_equivalence(self):
        """Fast bilinear term matches direct summation on 10 random 16^3 fields."""
        t0 = time.time()
        g = GridSpec(16, 16, 16, 0.5, (-4.0, -4.0, 1.0))
        plan = make_plan(g, "fast")
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(10):
            v = VectorField(g, rng.standard_normal((3,) + g.shape))
            fast = bilinear_term(v, plan)
            direct = bilinear_term_direct(v)
            rel = enorm(g, fast.data - direct.data) / enorm(g, direct.data)
            worst = max(worst, rel)
        elapsed = time.time() - t0
        report(1, worst <= 1e-10 and elapsed <= 60.0,
               f"max rel err {worst:.2e} (limit 1e-10), {elapsed:.1f}s (limit 60s)")


class TestCriterion2:
    def test_linear_regime_exactness(self):
        """100 heat-only steps match exp(-t|k|^2) v0 to 1e-12 relative."""
        g = GridSpec(16, 16, 16, 0.5, (-4.0, -4.0, 1.0))
        rng = np.random.default_rng(7)
        v0 = VectorField(g, rng.standard_normal((3,) + g.shape))
        dt, n = 1e-3, 100
        v = v0
        for _ in range(n):
            v = step(v, dt, plan=None)
        exact = heat_decay(g, n * dt) * v0.data
        rel = enorm(g, v.data - exact) / enorm(g, exact)
        report(2, rel <= 1e-12, f"rel err {rel:.2e} after 100 steps (limit 1e-12)")


class TestCriterion3:
    def test_series_integrator_convergence_order(self):
        """Halving A from 1e-2 to 5e-3 shrinks the discrepancy by 12x-20x."""
        t0 = time.time()
        cfg = ts.load_config(CONFIG_DIR / "series-toy.cfg")
        g, spec = cfg.grid, cfg.init
        assert g.shape == (16, 16, 16)
        c0 = build_initial_data(spec.with_amplitude(1.0), g)
        t_cmp = cfg.t_max
        series = ts.compute_series(c0, t_cmp, num_samples=64, p_max=3,
                                   method="direct")
        discs = []
        for a in (1e-2, 5e-3):
            res = run(cfg.with_amplitude(a))
            v_int = res.snapshots[-1][1]
            v_ser = series_solution(series, a, t_cmp, 3)
            discs.append(enorm(g, v_int.data - v_ser.data))
        ratio = discs[0] / discs[1]
        elapsed = time.time() - t0
        report(3, 12.0 <= ratio <= 20.0 and elapsed <= 300.0,
               f"discrepancy ratio {ratio:.2f} (window [12, 20], theoretical 16), "
               f"{elapsed:.0f}s (limit 300s)")


class TestCriterion4:
    def test_dt_refinement_first_order(self):
        """Error vs a dt/8 reference halves when dt halves (ratio in [1.7, 2.3])."""
        g = GridSpec(12, 12, 24, 0.5, (-3.0, -3.0, 0.5))
        spec = HermiteInitSpec(R=2.0, D=3, lam=ts.random_lambda(3, 5), amplitude=0.8)
        t_star = 0.016

        def solution(dt):
            res = run(RunConfig(grid=g, init=spec, dt=dt, t_max=t_star, method="fast"))
            assert res.outcome == "completed"
            return res.snapshots[-1][1].data

        def err(dt):
            return enorm(g, solution(dt) - solution(dt / 8))

        ratio = err(1e-3) / err(5e-4)
        report(4, 1.7 <= ratio <= 2.3, f"error ratio {ratio:.3f} (window [1.7, 2.3])")


class TestCriterion5:
    def test_support_localization(self):
        """>= 90% of each coefficient's mass within |z - pR| <= 3 sqrt(pR), p = 2, 3."""
        cfg = ts.load_config(CONFIG_DIR / "desk.cfg")
        R = cfg.init.R
        g = GridSpec(61, 61, 77, 0.25, (-7.5, -7.5, 1.0))
        assert g.axis(2)[-1] >= 4 * R
        c0 = build_initial_data(cfg.init.with_amplitude(1.0), g)
        series = ts.compute_series(c0, 0.01, num_samples=16, p_max=3, method="fast")
        fracs = {}
        for p in (2, 3):
            prof = z_marginal(VectorField(g, series.coeffs[p][-1]))
            bands = detect_clouds(prof, g, R=R, p_max=3, band_width=3.0)
            fracs[p] = bands[p - 1].mass_fraction
        ok = all(f >= 0.90 for f in fracs.values())
        report(5, ok, f"band mass fractions p=2: {fracs[2]:.4f}, p=3: {fracs[3]:.4f} "
                      f"(floor 0.90)")


class TestCriterion6:
    @pytest.mark.parametrize("alpha", [5.0, 15.0, 20.0])
    def test_exponent_fitter_oracle(self, alpha):
        """fit_blowup recovers alpha within 5% and t_cr within 2% of the horizon."""
        t_cr, lo, hi = 0.05, 0.02, 0.049
        tr = EnergyTrace()
        for t in np.linspace(lo, hi, 80):
            tr.append(float(t), (t_cr - t) ** (-alpha))
        fit = fit_blowup(tr)
        a_ok = abs(fit.alpha - alpha) <= 0.05 * alpha
        t_ok = abs(fit.t_cr - t_cr) <= 0.02 * hi
        report(6, a_ok and t_ok,
               f"alpha {fit.alpha:.3f} (true {alpha}), t_cr {fit.t_cr:.5f} (true {t_cr})")


@pytest.fixture(scope="module")
def desk_run():
    cfg = ts.load_config(CONFIG_DIR / "desk.cfg")
    t0 = time.time()
    result = run(cfg)
    result.elapsed = time.time() - t0
    return cfg, result


@pytest.fixture(scope="module")
def desk_run_perturbed(desk_run):
    cfg, _ = desk_run
    g = cfg.grid
    # +25% on dt and h; origin scales with h so the lattice offset is unchanged
    scale = 1.25
    g2 = GridSpec(g.nx, g.ny, g.nz, g.h * scale, tuple(c * scale for c in g.origin))
    cfg2 = RunConfig(grid=g2, init=cfg.init, dt=cfg.dt * scale, t_max=cfg.t_max,
                     snapshot_every=cfg.snapshot_every,
                     blowup_threshold=cfg.blowup_threshold, method=cfg.method)
    return cfg2, run(cfg2)


class TestCriterion7:
    def test_qualitative_blowup_shape(self, desk_run):
        """Desk-scale trace: monotone decrease, minimum, then >= 1e3 growth."""
        cfg, res = desk_run
        ms = res.trace.mynorms
        i_min = int(np.argmin(ms))
        monotone = bool(np.all(np.diff(ms[: i_min + 1]) < 0)) and i_min >= 1
        growth = float(ms[-1] / ms[i_min])
        ok = (res.blew_up and monotone and growth >= 1e3
              and res.elapsed <= 1800.0)
        report(7, ok,
               f"outcome {res.outcome}, dip of {i_min} steps to M={ms[i_min]:.4f}, "
               f"growth x{growth:.3g} (floor 1e3), {res.elapsed:.0f}s (target 1800s)")


class TestCriterion8:
    def test_discretization_robustness(self, desk_run, desk_run_perturbed):
        """+25% dt and h preserves blow-up; fitted t_cr shifts < 30%."""
        _, res = desk_run
        _, res_p = desk_run_perturbed
        fit = fit_blowup(res.trace)
        fit_p = fit_blowup(res_p.trace)
        shift = abs(fit_p.t_cr - fit.t_cr) / fit.t_cr
        ok = res_p.blew_up and shift < 0.30
        report(8, ok,
               f"perturbed outcome {res_p.outcome}, t_cr {fit.t_cr:.4f} -> "
               f"{fit_p.t_cr:.4f} (shift {100 * shift:.1f}%, limit 30%)")


class TestCriterion9:
    def test_cloud_structure(self, desk_run):
        """Final snapshot: >= 2 z-bands centered within sqrt(R) of multiples of R."""
        cfg, res = desk_run
        R = cfg.init.R
        t_snap, snap = res.snapshots[-1]
        prof = z_marginal(snap)
        bands = detect_clouds(prof, snap.grid, R=R, p_max=4, band_width=1.0)
        aligned = [b for b in bands
                   if b.mass_fraction >= 0.02
                   and abs(b.z_center - b.p * R) <= math.sqrt(R)]
        detail = " ".join(
            f"p{b.p}:center={b.z_center:.2f},mass={b.mass_fraction:.3f}" for b in bands
        )
        report(9, len(aligned) >= 2, f"aligned bands {len(aligned)} (need >= 2): {detail}")


class TestCriterion10:
    def test_io_round_trips(self, tmp_path):
        """Snapshots bit-exact, CSV value-exact, CLI byte-deterministic."""
        from tornsim.cli import main
        from tornsim.storage import read_energy_csv, read_snapshot, write_snapshot

        g = GridSpec(12, 10, 14, 0.5, (-3.0, -2.5, 1.0))
        rng = np.random.default_rng(99)
        v = VectorField(g, rng.standard_normal((3,) + g.shape))
        snap_path = tmp_path / "v.torn"
        write_snapshot(v, 0.125, snap_path)
        v2, t2 = read_snapshot(snap_path)
        bit_exact = t2 == 0.125 and np.array_equal(v2.data, v.data)

        tr = EnergyTrace()
        tt = 0.0
        for _ in range(200):
            tt += float(rng.uniform(1e-5, 1e-3))
            tr.append(tt, float(rng.uniform(0, 10)))
        csv_path = tmp_path / "tr.csv"
        ts.write_energy_csv(tr, csv_path)
        back = read_energy_csv(csv_path)
        csv_exact = (np.array_equal(back.ts, tr.ts)
                     and np.array_equal(back.energies, tr.energies)
                     and np.array_equal(back.mynorms, tr.mynorms))

        cfg_path = CONFIG_DIR / "toy.cfg"
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(["run", str(cfg_path), "--out", str(out1)]) == 0
        assert main(["run", str(cfg_path), "--out", str(out2)]) == 0
        cli_exact = (
            (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
            and sorted(p.read_bytes() for p in out1.glob("*.torn"))
            == sorted(p.read_bytes() for p in out2.glob("*.torn"))
        )
        report(10, bit_exact and csv_exact and cli_exact,
               f"snapshot bit-exact {bit_exact}, csv value-exact {csv_exact}, "
               f"cli byte-deterministic {cli_exact}")
