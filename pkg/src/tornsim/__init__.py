"""tornsim: Fourier-space simulator for tornado-type blow-up of the complex
3D Navier-Stokes system with Hermite-product initial data."""

from .fields import (
    CloudBand,
    EnergyTrace,
    VectorField,
    detect_clouds,
    energy,
    heat_decay,
    leray_project,
    leray_project_point,
    z_marginal,
)
from .grid import GridSpec
from .hermite import HermiteInitSpec, build_initial_data, hermite_function, random_lambda
from .integrator import (
    BlowupFit,
    RunConfig,
    RunResult,
    fit_blowup,
    run,
    step,
    sweep,
)
from .nonlinear import (
    ConvolutionPlan,
    bilinear_term,
    bilinear_term_direct,
    make_plan,
    weighted_bilinear,
)
from .series import SeriesSet, compute_h2, compute_hp, compute_series, series_solution, support_report
from .config import ConfigError, load_config, parse_config
from .storage import (
    read_energy_csv,
    read_snapshot,
    write_energy_csv,
    write_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupFit",
    "CloudBand",
    "ConfigError",
    "ConvolutionPlan",
    "EnergyTrace",
    "GridSpec",
    "HermiteInitSpec",
    "RunConfig",
    "RunResult",
    "SeriesSet",
    "VectorField",
    "bilinear_term",
    "bilinear_term_direct",
    "build_initial_data",
    "compute_h2",
    "compute_hp",
    "compute_series",
    "detect_clouds",
    "energy",
    "fit_blowup",
    "heat_decay",
    "hermite_function",
    "leray_project",
    "leray_project_point",
    "load_config",
    "make_plan",
    "parse_config",
    "random_lambda",
    "read_energy_csv",
    "read_snapshot",
    "run",
    "series_solution",
    "step",
    "support_report",
    "sweep",
    "weighted_bilinear",
    "write_energy_csv",
    "write_snapshot",
    "z_marginal",
]
