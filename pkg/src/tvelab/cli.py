"""Command-line interface.

Subcommands:

* ``run CONFIG``: simulate one scenario and write ``monitor.csv``,
  ``ledger.json``, ``summary.json``, ``config_resolved.toml`` and
  ``initial_fields.csv`` into the output directory.
* ``sweep SWEEP``: run the cross product of a sweep file's override axes
  (optionally in parallel processes) and write ``sweep_summary.csv``.
* ``constants CONFIG``: print the constants ledger for a scenario, optionally
  writing it to a JSON file.
* ``check-inequalities CONFIG``: validate the functional inequalities the
  decay certificate rests on against seeded field ensembles.
* ``version``: print the package version.

Exit codes: 0 on success (run reached its final time; all inequality checks
hold), 1 when a run or sweep cell ends abnormally or a check fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .coefficients import TemperatureRangeError, smallness_report
from .config import (
    ScenarioConfig,
    SweepConfig,
    emit_toml,
    load_scenario,
    load_sweep,
    parse_scenario,
)
from .dynamics import SimState
from .grid import Grid, ScalarField, lp_gradient_norm
from .inequalities import (
    ConstantsLedger,
    build_constants_ledger,
    calibrate_gn_constant,
    estimate_poincare_constant,
    gn_interpolation_check,
    poincare_hessian_check,
    random_cosine_fields,
    write_ledger_json,
)
from .integrator import MonitorConfig, StepControl, TerminalStatus, Trajectory, run
from .monitor import EnergyWeights, decay_fit, write_monitor_csv

__all__ = ["main", "run_scenario", "run_sweep", "RunResult"]

SUMMARY_SCHEMA = "summary-v1"


@dataclass
class RunResult:
    """Everything a finished scenario run produced."""

    trajectory: Trajectory
    ledger: ConstantsLedger
    summary: dict
    output_dir: Path


def _initial_energy_scale(
    u0: ScalarField, u0t: ScalarField, theta0: ScalarField, p: float
) -> float:
    """Sum of the four initial gradient integrals that gate the small-data regime."""
    return float(
        lp_gradient_norm(u0t, p)
        + lp_gradient_norm(u0, p)
        + lp_gradient_norm(u0, p + 2.0)
        + lp_gradient_norm(theta0, p)
    )


def build_run_ledger(config: ScenarioConfig) -> ConstantsLedger:
    """Constants ledger for a scenario, sized to its initial data."""
    u0, u0t, _, theta0 = config.initial.build(config.grid, config.params)
    theta_dev = float(
        np.max(np.abs(theta0.values - config.params.theta_star))
    )
    energy_sum = _initial_energy_scale(u0, u0t, theta0, config.params.p)
    eta_run = energy_sum ** (1.0 / config.params.p) if energy_sum > 0.0 else 0.0
    return build_constants_ledger(
        config.grid,
        config.spec,
        config.params,
        overrides=config.ledger_overrides or None,
        seed=config.seed,
        initial_theta_deviation=theta_dev,
        eta_run=eta_run,
    )


def _energy_weights(config: ScenarioConfig, ledger: ConstantsLedger) -> EnergyWeights:
    base = EnergyWeights.from_ledger(ledger)
    if not config.weight_overrides:
        return base
    return EnergyWeights(
        w_u_p=config.weight_overrides.get("w_u_p", base.w_u_p),
        w_theta_p=config.weight_overrides.get("w_theta_p", base.w_theta_p),
        w_u_p2=config.weight_overrides.get("w_u_p2", base.w_u_p2),
    )


def _write_initial_fields_csv(
    path: Path,
    grid: Grid,
    u0: np.ndarray,
    u0t: np.ndarray,
    v0: np.ndarray,
    theta0: np.ndarray,
) -> None:
    coords = grid.coordinate_fields()
    coord_names = ("x", "y")[: grid.dim]
    header = ",".join(list(coord_names) + ["u0", "u0t", "v0", "theta0"])
    columns = [c.ravel() for c in coords] + [
        u0.ravel(),
        u0t.ravel(),
        v0.ravel(),
        theta0.ravel(),
    ]
    with open(path, "w", newline="\n") as handle:
        handle.write("# initial-fields-v1\n")
        handle.write(header + "\n")
        for row in zip(*columns):
            handle.write(",".join(f"{value:.17e}" for value in row) + "\n")


def _json_float(value: float | None) -> float | None:
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def build_summary(
    config: ScenarioConfig,
    trajectory: Trajectory,
    ledger: ConstantsLedger,
    theta_dev: float,
    order: int,
) -> dict:
    """Assemble the run summary written as ``summary.json``."""
    cols = trajectory.columns
    times = np.asarray(cols["t"])
    y = np.asarray(cols["y"])

    kappa_fit: float | None = None
    r_squared: float | None = None
    if trajectory.status is TerminalStatus.COMPLETED and len(times) >= 10:
        try:
            fit = decay_fit(times, y)
            kappa_fit, r_squared = fit.kappa_fit, fit.r_squared
        except ValueError:
            kappa_fit = None
            r_squared = None

    report = smallness_report(config.spec, config.params, ledger.delta_p)
    summary = {
        "schema": SUMMARY_SCHEMA,
        "status": trajectory.status.value,
        "reason": trajectory.status_reason,
        "order": order,
        "dt": trajectory.dt,
        "steps_per_sample": trajectory.steps_per_sample,
        "steps_taken": trajectory.steps_taken,
        "samples": int(len(times)),
        "kappa_fit": _json_float(kappa_fit),
        "r_squared": _json_float(r_squared),
        "residuals": {
            "odi_min": float(np.min(cols["odi_residual"])),
            "gradu_rate_min": float(np.min(cols["gradu_rate_residual"])),
            "gradu_hi_rate_min": float(np.min(cols["gradu_hi_rate_residual"])),
            "mass_max": float(np.max(np.abs(cols["mass_residual"]))),
        },
        "smallness": {
            "ratio_damping": report.ratio_damping,
            "ratio_coupling": report.ratio_coupling,
            "delta_p": ledger.delta_p,
            "damping_small": report.damping_small,
            "coupling_small": report.coupling_small,
        },
        "initial": {
            "theta_dev_inf": theta_dev,
            "eta": ledger.eta_run,
            "y0": float(y[0]),
        },
        "final": {
            "t": float(times[-1]),
            "y": float(y[-1]),
            "theta_min": float(cols["theta_min"][-1]),
            "theta_max": float(cols["theta_max"][-1]),
        },
        "watchdog": {
            "tripped": bool(trajectory.watchdog_tripped),
            "w1p_limit": _json_float(trajectory.w1p_limit),
            "theta_inf_limit": _json_float(trajectory.theta_inf_limit),
        },
    }
    return summary


def run_scenario(
    config: ScenarioConfig,
    output_dir: str | Path,
    order_override: int | None = None,
) -> RunResult:
    """Simulate one scenario and write all run artifacts into ``output_dir``."""
    order = config.order if order_override is None else int(order_override)
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    grid, params, spec = config.grid, config.params, config.spec
    u0, u0t, v0, theta0 = config.initial.build(grid, params)
    theta_dev = float(np.max(np.abs(theta0.values - params.theta_star)))

    ledger = build_run_ledger(config)
    weights = _energy_weights(config, ledger)

    state = SimState(v=v0, u=u0, theta=theta0, t=0.0)
    control = StepControl(
        dt_init=config.dt_init,
        t_end=config.t_end,
        cfl_fraction=config.cfl_fraction,
        max_steps=config.max_steps,
        watchdog=config.watchdog,
    )
    monitor = MonitorConfig(
        sample_interval=config.sample_interval, ledger=ledger, weights=weights
    )
    trajectory = run(state, spec, params, control, monitor, order=order)

    summary = build_summary(config, trajectory, ledger, theta_dev, order)

    resolved = config.resolved_dict()
    resolved["scheme"]["order"] = order
    resolved.setdefault("output", {})["directory"] = str(out)

    write_monitor_csv(out / "monitor.csv", trajectory.columns)
    write_ledger_json(out / "ledger.json", ledger)
    with open(out / "summary.json", "w", newline="\n") as handle:
        json.dump(summary, handle, indent=2)
        handle.write("\n")
    with open(out / "config_resolved.toml", "w", newline="\n") as handle:
        handle.write(emit_toml(resolved))
    _write_initial_fields_csv(
        out / "initial_fields.csv",
        grid,
        u0.values,
        u0t.values,
        v0.values,
        theta0.values,
    )
    return RunResult(
        trajectory=trajectory, ledger=ledger, summary=summary, output_dir=out
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

_SWEEP_FIELDS = (
    "status",
    "kappa_fit",
    "r_squared",
    "y0",
    "y_max",
    "watchdog_tripped",
    "output_dir",
)


def _sweep_cell(task: tuple[int, dict, str]) -> dict:
    """Run one sweep cell; never raises (errors become a status row)."""
    index, raw, out_dir = task
    row: dict[str, Any] = {"run_index": index, "output_dir": out_dir}
    try:
        config = parse_scenario(raw)
        result = run_scenario(config, out_dir)
        summary = result.summary
        y = np.asarray(result.trajectory.columns["y"])
        row.update(
            status=summary["status"],
            kappa_fit=summary["kappa_fit"],
            r_squared=summary["r_squared"],
            y0=float(y[0]),
            y_max=float(np.max(y)),
            watchdog_tripped=summary["watchdog"]["tripped"],
        )
    except Exception as err:  # noqa: BLE001 - cell isolation is the point
        row.update(
            status="error",
            kappa_fit=None,
            r_squared=None,
            y0=None,
            y_max=None,
            watchdog_tripped=None,
        )
        row["error"] = str(err)
    return row


def _sweep_csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_sweep(sweep: SweepConfig, output_dir: str | Path) -> list[dict]:
    """Run every sweep cell and write ``sweep_summary.csv``; returns the rows."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    cells = sweep.cells()
    axis_paths = [axis.path for axis in sweep.axes]
    tasks = []
    axis_values: list[list[Any]] = []
    for index, raw in enumerate(cells):
        values = []
        for axis in sweep.axes:
            table: Any = raw
            for part in axis.path.split("."):
                table = table[part]
            values.append(table)
        axis_values.append(values)
        cell_dir = out / f"cell_{index:03d}"
        raw.setdefault("output", {})["directory"] = str(cell_dir)
        tasks.append((index, raw, str(cell_dir)))

    if sweep.parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=sweep.parallelism) as executor:
            rows = list(executor.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(task) for task in tasks]

    header = ["run_index", *axis_paths, *_SWEEP_FIELDS]
    with open(out / "sweep_summary.csv", "w", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row, values in zip(rows, axis_values):
            cells_out = [str(row["run_index"])]
            cells_out += [_sweep_csv_cell(v) for v in values]
            cells_out += [_sweep_csv_cell(row.get(name)) for name in _SWEEP_FIELDS]
            handle.write(",".join(cells_out) + "\n")
    return rows


# ---------------------------------------------------------------------------
# Inequality checking
# ---------------------------------------------------------------------------


def check_inequalities(
    grid: Grid,
    p: float,
    ensemble_size: int = 100,
    seed: int = 0,
    report: Any = print,
) -> bool:
    """Validate the curvature and interpolation inequalities on seeded ensembles."""
    ledger_cp = estimate_poincare_constant(
        grid, p, ensemble_size=max(200, ensemble_size), seed=seed
    )
    k3 = calibrate_gn_constant(grid, p, ensemble_size=1000, seed=seed)
    report(f"mean-deviation constant estimate: {ledger_cp:.6e}")
    report(f"interpolation constant estimate:  {k3:.6e}")

    probe = _ProbeLedger(c1_poincare=_curvature_budget(p, grid.dim, ledger_cp), K3=k3)
    fields = [
        ScalarField(grid, values)
        for values in random_cosine_fields(grid, ensemble_size, seed=seed + 1000)
    ]

    curvature_fail = 0
    for field in fields:
        if not poincare_hessian_check(field, p, probe).holds:
            curvature_fail += 1
    report(
        f"curvature inequality: {ensemble_size - curvature_fail}/{ensemble_size} hold"
    )

    interp_fail = 0
    total = 0
    for mu in (0.1, 1.0, 10.0):
        for field in fields:
            total += 1
            if not gn_interpolation_check(field, p, mu, probe).holds:
                interp_fail += 1
    report(f"interpolation inequality: {total - interp_fail}/{total} hold")
    return curvature_fail == 0 and interp_fail == 0


def _curvature_budget(p: float, dim: int, poincare_constant: float) -> float:
    return (p - 2.0 + np.sqrt(dim)) ** 2 * poincare_constant ** (2.0 / p)


class _ProbeLedger:
    """Just the two constants the ensemble checks read from a full ledger."""

    def __init__(self, c1_poincare: float, K3: float) -> None:
        self.c1_poincare = float(c1_poincare)
        self.K3 = float(K3)


# ---------------------------------------------------------------------------
# argparse plumbing
# ---------------------------------------------------------------------------


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    output = args.output or config.output_dir
    if output is None:
        output = Path("runs") / Path(args.config).stem
    result = run_scenario(config, output, order_override=args.order)
    status = result.trajectory.status
    print(f"status: {status.value}")
    if result.trajectory.status_reason:
        print(f"reason: {result.trajectory.status_reason}")
    kappa = result.summary["kappa_fit"]
    if kappa is not None:
        print(
            f"decay fit: rate {kappa:.6e}, "
            f"r^2 {result.summary['r_squared']:.6f}"
        )
    print(f"outputs: {result.output_dir}")
    return 0 if status is TerminalStatus.COMPLETED else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    sweep = load_sweep(args.sweep)
    output = args.output or Path(args.sweep).with_suffix("")
    rows = run_sweep(sweep, output)
    bad = 0
    for row in rows:
        status = row["status"]
        print(f"cell {row['run_index']:03d}: {status}")
        if status in ("error", TerminalStatus.STEP_FAILURE.value):
            bad += 1
    print(f"sweep summary: {Path(output) / 'sweep_summary.csv'}")
    return 0 if bad == 0 else 1


def _cmd_constants(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    ledger = build_run_ledger(config)
    data = ledger.to_json_dict()
    if args.output:
        write_ledger_json(args.output, ledger)
        print(f"ledger written: {args.output}")
    else:
        for name, entry in data["entries"].items():
            print(f"{name:16s} = {entry['value']:.12e}  [{entry['provenance']}]")
        print(f"feasible: {data['A_feasible']}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    ok = check_inequalities(
        config.grid,
        config.params.p,
        ensemble_size=args.samples,
        seed=config.seed,
    )
    print("all inequality checks hold" if ok else "inequality check FAILED")
    return 0 if ok else 1


def _cmd_version(args: argparse.Namespace) -> int:
    print(__version__)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvelab",
        description=(
            "Simulator and verification laboratory for a damped "
            "thermoviscoelastic system with temperature-dependent coefficients."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario TOML")
    p_run.add_argument("config", help="scenario TOML file")
    p_run.add_argument("--output", help="output directory (overrides the config)")
    p_run.add_argument(
        "--order", type=int, choices=(1, 2), help="time scheme order override"
    )
    p_run.set_defaults(handler=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep TOML")
    p_sweep.add_argument("sweep", help="sweep TOML file")
    p_sweep.add_argument("--output", help="sweep output directory")
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_const = sub.add_parser(
        "constants", help="print or export the constants ledger for a scenario"
    )
    p_const.add_argument("config", help="scenario TOML file")
    p_const.add_argument("--output", help="write ledger JSON to this path")
    p_const.set_defaults(handler=_cmd_constants)

    p_check = sub.add_parser(
        "check-inequalities",
        help="validate the functional inequalities on seeded ensembles",
    )
    p_check.add_argument("config", help="scenario TOML file")
    p_check.add_argument(
        "--samples", type=int, default=100, help="ensemble size (default 100)"
    )
    p_check.set_defaults(handler=_cmd_check)

    p_version = sub.add_parser("version", help="print the package version")
    p_version.set_defaults(handler=_cmd_version)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, TypeError, KeyError, OSError, TemperatureRangeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
