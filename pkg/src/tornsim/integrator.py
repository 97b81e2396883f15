"""Exponential-Euler time stepping, blow-up detection and growth-exponent fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import EnergyTrace, VectorField, energy, heat_decay
from .grid import GridSpec
from .hermite import HermiteInitSpec, build_initial_data
from .nonlinear import ConvolutionPlan, bilinear_term, make_plan

OUTCOME_COMPLETED = "completed"
OUTCOME_THRESHOLD = "blowup_threshold"
OUTCOME_OVERFLOW = "overflow"
BLOWUP_OUTCOMES = (OUTCOME_THRESHOLD, OUTCOME_OVERFLOW)


class NumericalOverflow(RuntimeError):
    """Raised by ``step`` when the update produces non-finite values."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one integration needs; parsed from config files by io."""

    grid: GridSpec
    init: HermiteInitSpec
    dt: float
    t_max: float
    snapshot_every: int = 0  # 0: snapshot only at termination
    blowup_threshold: float = 1e4
    method: str = "fast"
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if not self.blowup_threshold > 1:
            raise ValueError(f"blowup_threshold must exceed 1, got {self.blowup_threshold}")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")

    def with_amplitude(self, a: float) -> "RunConfig":
        return replace(self, init=self.init.with_amplitude(a))


def step(v: VectorField, dt: float, plan: ConvolutionPlan | None,
         assume_solenoidal: bool = False,
         _decay: np.ndarray | None = None) -> VectorField:
    """One integrating-factor Euler step v' = exp(-dt |k|^2) (v + dt B(v)).

    ``plan=None`` disables the bilinear term (pure heat flow, exact). The heat
    factor is exact at every wavenumber, which is what keeps the stiff large-k
    modes stable at any dt.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    decay = heat_decay(v.grid, dt) if _decay is None else _decay
    if plan is None:
        data = decay * v.data
    else:
        b = bilinear_term(v, plan, assume_solenoidal=assume_solenoidal)
        data = decay * (v.data + dt * b.data)
    if not np.all(np.isfinite(data)):
        raise NumericalOverflow("numerical overflow: non-finite values after step")
    return VectorField(v.grid, data)


@dataclass
class RunResult:
    trace: EnergyTrace
    snapshots: list[tuple[float, VectorField]]
    outcome: str
    t_end: float

    @property
    def blew_up(self) -> bool:
        return self.outcome in BLOWUP_OUTCOMES


def run(cfg: RunConfig, keep_snapshots: bool = True) -> RunResult:
    """Integrate from the Hermite initial data until t_max, threshold or overflow.

    The trace records every step; blow-up termination (threshold or overflow)
    is a normal outcome carrying the partial trace.
    """
    field_v = build_initial_data(cfg.init, cfg.grid)
    plan = make_plan(cfg.grid, cfg.method)
    decay = heat_decay(cfg.grid, cfg.dt)
    # The solenoidal shortcut is only sound when the state stays projected.
    solenoidal = cfg.init.project

    trace = EnergyTrace()
    e = energy(field_v)
    trace.append(0.0, e)
    m_min = math.sqrt(e)
    snapshots: list[tuple[float, VectorField]] = []
    outcome = OUTCOME_COMPLETED
    t = 0.0
    n_steps = int(round(cfg.t_max / cfg.dt))
    for istep in range(1, n_steps + 1):
        try:
            field_v = step(field_v, cfg.dt, plan, assume_solenoidal=solenoidal,
                           _decay=decay)
        except NumericalOverflow:
            outcome = OUTCOME_OVERFLOW
            break
        t = istep * cfg.dt
        e = energy(field_v)
        trace.append(t, e)
        m = math.sqrt(e)
        m_min = min(m_min, m)
        if keep_snapshots and cfg.snapshot_every and istep % cfg.snapshot_every == 0:
            snapshots.append((t, field_v.copy()))
        if m > cfg.blowup_threshold * m_min and m_min > 0.0:
            outcome = OUTCOME_THRESHOLD
            break
    if keep_snapshots and (not snapshots or snapshots[-1][0] != t):
        snapshots.append((t, field_v.copy()))
    return RunResult(trace, snapshots, outcome, t)


@dataclass(frozen=True)
class BlowupFit:
    """Power-law fit E(t) ~ C / (t_cr - t)^alpha over a trailing growth window."""

    t_cr: float
    alpha: float
    window: tuple[float, float]
    residual: float


def _loglog_fit(ts: np.ndarray, log_e: np.ndarray, t_cr: float):
    x = np.log(t_cr - ts)
    coef = np.polyfit(x, log_e, 1)
    res = log_e - np.polyval(coef, x)
    return -coef[0], float(np.sqrt(np.mean(res * res)))


def fit_blowup(trace: EnergyTrace, tail_fraction: float = 0.5) -> BlowupFit:
    """Fit log E(t) = log C - alpha log(t_cr - t) on the trailing growth window.

    t_cr is a free parameter found by golden-section search (t_cr > t_hi)
    minimizing the RMS residual of the linear fit. Requires at least 10
    trailing points of monotone energy growth.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must be in (0, 1]")
    es = trace.energies
    ts = trace.ts
    n = len(es)
    g0 = n - 1
    while g0 > 0 and es[g0] > es[g0 - 1]:
        g0 -= 1
    growth = n - g0
    if growth < 10:
        raise ValueError(
            f"no blow-up signature: only {growth - 1} trailing points of monotone growth"
        )
    start = max(g0, n - max(10, math.ceil(tail_fraction * growth)))
    tw, ew = ts[start:], np.log(es[start:])
    t_lo, t_hi = float(tw[0]), float(tw[-1])
    span = t_hi - t_lo

    def rms(t_cr: float) -> float:
        return _loglog_fit(tw, ew, t_cr)[1]

    lo = t_hi + 1e-9 * span
    hi = t_hi + 10.0 * span
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = rms(c), rms(d)
    for _ in range(200):
        if b - a < 1e-14 + 1e-12 * span:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = rms(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = rms(d)
    t_cr = 0.5 * (a + b)
    alpha, residual = _loglog_fit(tw, ew, t_cr)
    return BlowupFit(float(t_cr), float(alpha), (t_lo, t_hi), residual)


@dataclass(frozen=True)
class SweepRow:
    amplitude: float
    outcome: str  # "decay" | "blowup"
    t_cr: float | None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    bracket: tuple[float, float] | None = None
    bisect_rows: list[SweepRow] = field(default_factory=list)


def _classify(cfg: RunConfig, a: float) -> SweepRow:
    res = run(cfg.with_amplitude(a), keep_snapshots=False)
    if res.blew_up:
        try:
            t_cr = fit_blowup(res.trace).t_cr
        except ValueError:
            t_cr = None
        return SweepRow(a, "blowup", t_cr)
    return SweepRow(a, "decay", None)


def sweep(base: RunConfig, amplitudes, bisect: bool = False,
          max_bisect: int = 8, target_rel_width: float = 0.05) -> SweepResult:
    """Classify each amplitude as decay or blow-up; optionally bracket the threshold.

    Bisection refines (in log scale) between the largest decaying and the
    smallest blowing amplitude until the bracket's relative width drops below
    ``target_rel_width`` or ``max_bisect`` extra runs are spent.
    """
    amps = sorted(float(a) for a in amplitudes)
    if any(a <= 0 for a in amps):
        raise ValueError("amplitudes must be positive")
    rows = [_classify(base, a) for a in amps]
    result = SweepResult(rows)
    if not bisect:
        return result
    first_blow = next((i for i, r in enumerate(rows) if r.outcome == "blowup"), None)
    if first_blow is None or first_blow == 0 or rows[first_blow - 1].outcome != "decay":
        return result
    lo, hi = rows[first_blow - 1].amplitude, rows[first_blow].amplitude
    for _ in range(max_bisect):
        if hi / lo - 1.0 <= target_rel_width:
            break
        mid = math.sqrt(lo * hi)
        row = _classify(base, mid)
        result.bisect_rows.append(row)
        if row.outcome == "blowup":
            hi = mid
        else:
            lo = mid
    result.bracket = (lo, hi)
    return result
