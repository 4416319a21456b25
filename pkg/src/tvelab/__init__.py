"""Simulator and verification laboratory for a damped wave–heat system.

The package integrates a quasilinear hyperbolic–parabolic system (a strongly
damped wave field coupled to a heat field through temperature-dependent
coefficients and quadratic heating), monitors composite gradient energies
along trajectories, and certifies the functional inequalities and decay
estimates the monitoring relies on.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .grid import (
    Grid,
    NonFiniteFieldError,
    ScalarField,
    VectorField,
    boundary_flux,
    divergence,
    gradient,
    hessian_frobenius,
    integral,
    laplacian_neumann,
    lp_deviation_norm,
    lp_gradient_norm,
    lp_norm,
    mean,
    weighted_dissipation,
)
from .coefficients import (
    CoefficientSpec,
    ModelParams,
    TemperatureRangeError,
    smallness_report,
)
from .dynamics import SimState
from .inequalities import (
    ConstantsLedger,
    build_constants_ledger,
    calibrate_gn_constant,
    estimate_poincare_constant,
    gn_interpolation_check,
    poincare_hessian_check,
    write_ledger_json,
)
from .integrator import (
    LinearSolveError,
    MonitorConfig,
    StepControl,
    TerminalStatus,
    Trajectory,
    WatchdogConfig,
    run,
    select_dt,
    step,
)
from .monitor import (
    EnergyWeights,
    MONITOR_COLUMNS,
    combine_energy,
    decay_fit,
    read_monitor_csv,
    write_monitor_csv,
)
from .config import (
    InitialConditions,
    ScenarioConfig,
    SweepConfig,
    load_scenario,
    load_sweep,
)
from .cli import main, run_scenario, run_sweep

__all__ = [
    "Grid",
    "NonFiniteFieldError",
    "ScalarField",
    "VectorField",
    "boundary_flux",
    "divergence",
    "gradient",
    "hessian_frobenius",
    "integral",
    "laplacian_neumann",
    "lp_deviation_norm",
    "lp_gradient_norm",
    "lp_norm",
    "mean",
    "weighted_dissipation",
    "CoefficientSpec",
    "ModelParams",
    "TemperatureRangeError",
    "smallness_report",
    "SimState",
    "ConstantsLedger",
    "build_constants_ledger",
    "calibrate_gn_constant",
    "estimate_poincare_constant",
    "gn_interpolation_check",
    "poincare_hessian_check",
    "write_ledger_json",
    "LinearSolveError",
    "MonitorConfig",
    "StepControl",
    "TerminalStatus",
    "Trajectory",
    "WatchdogConfig",
    "run",
    "select_dt",
    "step",
    "EnergyWeights",
    "MONITOR_COLUMNS",
    "combine_energy",
    "decay_fit",
    "read_monitor_csv",
    "write_monitor_csv",
    "InitialConditions",
    "ScenarioConfig",
    "SweepConfig",
    "load_scenario",
    "load_sweep",
    "main",
    "run_scenario",
    "run_sweep",
    "__version__",
]
