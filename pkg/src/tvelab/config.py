"""TOML scenario and sweep configuration.

A scenario file fully determines one reproducible run: grid, bulk
parameters, the four material laws (ascending polynomial coefficients),
Neumann-compatible cosine-series initial data, time windows, scheme order,
monitor/ledger overrides, watchdog thresholds, output directory, and seed.
A sweep file points at a base scenario and enumerates override axes whose
cross product defines the sweep cells.

The module also carries a minimal TOML emitter so a resolved copy of every
configuration can be written next to the run outputs.
"""

from __future__ import annotations

import copy
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .coefficients import CoefficientSpec, ModelParams
from .grid import Grid, ScalarField
from .inequalities import OVERRIDABLE_CONSTANTS
from .integrator import WatchdogConfig

__all__ = [
    "InitialConditions",
    "ScenarioConfig",
    "SweepAxis",
    "SweepConfig",
    "parse_scenario",
    "load_scenario",
    "parse_sweep",
    "load_sweep",
    "apply_override",
    "emit_toml",
]


_TOP_KEYS = {
    "grid",
    "model",
    "coefficients",
    "initial",
    "time",
    "scheme",
    "monitors",
    "watchdog",
    "output",
    "run",
}
_SECTION_KEYS = {
    "grid": {"dim", "lengths", "cells"},
    "model": {"a", "D", "p", "theta_star"},
    "coefficients": {"viscosity", "heating", "stress", "coupling"},
    "initial": {
        "u0_const",
        "u0_modes",
        "u0t_const",
        "u0t_modes",
        "theta_const",
        "theta_modes",
        "scale",
        "theta_scale",
    },
    "time": {"t_end", "dt_init", "cfl_fraction", "sample_interval"},
    "scheme": {"order"},
    "monitors": {"w_u_p", "w_theta_p", "w_u_p2", "ledger"},
    "watchdog": {"w1p_threshold", "theta_inf_threshold"},
    "output": {"directory"},
    "run": {"seed", "max_steps"},
}


def _check_keys(section: str, table: Mapping[str, Any], allowed: set[str]) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ValueError(f"unknown keys in [{section}]: {unknown}")


def _require(table: Mapping[str, Any], section: str, key: str) -> Any:
    if key not in table:
        raise ValueError(f"missing required key '{key}' in [{section}]")
    return table[key]


@dataclass(frozen=True)
class InitialConditions:
    """Cosine-series initial data (constants plus per-mode amplitudes).

    Mode ``k`` is ``cos(k*pi*x/Lx)`` in 1D and the product
    ``cos(k*pi*x/Lx)*cos(k*pi*y/Ly)`` in 2D, so every profile satisfies the
    zero-normal-derivative boundary conditions exactly.  ``scale`` multiplies
    the displacement and rate amplitudes; ``theta_scale`` the temperature
    ones.  A ``theta_const`` of ``None`` resolves to the model's reference
    temperature.
    """

    u0_const: float = 0.0
    u0_modes: tuple[float, ...] = ()
    u0t_const: float = 0.0
    u0t_modes: tuple[float, ...] = ()
    theta_const: float | None = None
    theta_modes: tuple[float, ...] = ()
    scale: float = 1.0
    theta_scale: float = 1.0

    def _series(
        self, grid: Grid, const: float, modes: tuple[float, ...], amplitude: float
    ) -> np.ndarray:
        values = np.full(grid.shape, float(const))
        coords = grid.coordinate_fields()
        for k, amp in enumerate(modes, start=1):
            term = np.cos(k * np.pi * coords[0] / grid.lengths[0])
            if grid.dim == 2:
                term = term * np.cos(k * np.pi * coords[1] / grid.lengths[1])
            values = values + amplitude * float(amp) * term
        return values

    def build(
        self, grid: Grid, params: ModelParams
    ) -> tuple[ScalarField, ScalarField, ScalarField, ScalarField]:
        """(u0, u0t, v0, theta0) on the grid, with v0 = u0t + a*u0."""
        u0 = self._series(grid, self.u0_const, self.u0_modes, self.scale)
        u0t = self._series(grid, self.u0t_const, self.u0t_modes, self.scale)
        theta_const = params.theta_star if self.theta_const is None else self.theta_const
        theta0 = self._series(grid, theta_const, self.theta_modes, self.theta_scale)
        v0 = u0t + params.a * u0
        return (
            ScalarField(grid, u0),
            ScalarField(grid, u0t),
            ScalarField(grid, v0),
            ScalarField(grid, theta0),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully resolved simulation scenario."""

    grid: Grid
    params: ModelParams
    spec: CoefficientSpec
    initial: InitialConditions
    t_end: float
    dt_init: float
    cfl_fraction: float
    sample_interval: float
    order: int
    weight_overrides: dict[str, float] = field(default_factory=dict)
    ledger_overrides: dict[str, float] = field(default_factory=dict)
    watchdog: WatchdogConfig = field(default_factory=WatchdogConfig)
    output_dir: str | None = None
    seed: int = 0
    max_steps: int = 10_000_000

    def resolved_dict(self) -> dict:
        """Canonical nested dict with every default materialized."""
        init = self.initial
        theta_const = (
            self.params.theta_star if init.theta_const is None else init.theta_const
        )
        data: dict[str, Any] = {
            "grid": {
                "dim": self.grid.dim,
                "lengths": [float(v) for v in self.grid.lengths],
                "cells": [int(v) for v in self.grid.cells],
            },
            "model": {
                "a": self.params.a,
                "D": self.params.D,
                "p": self.params.p,
                "theta_star": self.params.theta_star,
            },
            "coefficients": {
                "viscosity": [float(c) for c in self.spec.viscosity.coef],
                "heating": [float(c) for c in self.spec.heating.coef],
                "stress": [[float(c) for c in poly.coef] for poly in self.spec.stress],
                "coupling": [
                    [float(c) for c in poly.coef] for poly in self.spec.coupling
                ],
            },
            "initial": {
                "u0_const": init.u0_const,
                "u0_modes": list(init.u0_modes),
                "u0t_const": init.u0t_const,
                "u0t_modes": list(init.u0t_modes),
                "theta_const": theta_const,
                "theta_modes": list(init.theta_modes),
                "scale": init.scale,
                "theta_scale": init.theta_scale,
            },
            "time": {
                "t_end": self.t_end,
                "dt_init": self.dt_init,
                "cfl_fraction": self.cfl_fraction,
                "sample_interval": self.sample_interval,
            },
            "scheme": {"order": self.order},
            "monitors": dict(self.weight_overrides),
            "watchdog": {},
            "output": {},
            "run": {"seed": self.seed, "max_steps": self.max_steps},
        }
        if self.ledger_overrides:
            data["monitors"]["ledger"] = dict(self.ledger_overrides)
        if self.watchdog.w1p_threshold is not None:
            data["watchdog"]["w1p_threshold"] = self.watchdog.w1p_threshold
        if self.watchdog.theta_inf_threshold is not None:
            data["watchdog"]["theta_inf_threshold"] = self.watchdog.theta_inf_threshold
        if self.output_dir is not None:
            data["output"]["directory"] = self.output_dir
        return data


def parse_scenario(raw: Mapping[str, Any]) -> ScenarioConfig:
    """Validate and type a scenario dict (strict about unknown keys).

    Raises:
        ValueError: Missing required key, unknown key, or invalid value.
    """
    _check_keys("<top level>", raw, _TOP_KEYS)

    grid_tab = _require(raw, "<top level>", "grid")
    _check_keys("grid", grid_tab, _SECTION_KEYS["grid"])
    lengths = [float(v) for v in _require(grid_tab, "grid", "lengths")]
    cells = [int(v) for v in _require(grid_tab, "grid", "cells")]
    dim = int(grid_tab.get("dim", len(lengths)))
    if dim != len(lengths) or dim != len(cells):
        raise ValueError(
            f"grid dim {dim} inconsistent with lengths ({len(lengths)}) "
            f"and cells ({len(cells)})"
        )
    grid = Grid(dim=dim, lengths=tuple(lengths), cells=tuple(cells))

    model_tab = _require(raw, "<top level>", "model")
    _check_keys("model", model_tab, _SECTION_KEYS["model"])
    params = ModelParams(
        a=float(_require(model_tab, "model", "a")),
        D=float(_require(model_tab, "model", "D")),
        p=float(_require(model_tab, "model", "p")),
        dim=dim,
        theta_star=float(model_tab.get("theta_star", 1.0)),
    )

    coeff_tab = _require(raw, "<top level>", "coefficients")
    _check_keys("coefficients", coeff_tab, _SECTION_KEYS["coefficients"])
    spec = CoefficientSpec.from_lists(
        viscosity=_require(coeff_tab, "coefficients", "viscosity"),
        heating=_require(coeff_tab, "coefficients", "heating"),
        stress=_require(coeff_tab, "coefficients", "stress"),
        coupling=_require(coeff_tab, "coefficients", "coupling"),
    )
    if spec.components != dim:
        raise ValueError(
            f"stress/coupling have {spec.components} components, grid dim is {dim}"
        )

    init_tab = raw.get("initial", {})
    _check_keys("initial", init_tab, _SECTION_KEYS["initial"])
    initial = InitialConditions(
        u0_const=float(init_tab.get("u0_const", 0.0)),
        u0_modes=tuple(float(v) for v in init_tab.get("u0_modes", [])),
        u0t_const=float(init_tab.get("u0t_const", 0.0)),
        u0t_modes=tuple(float(v) for v in init_tab.get("u0t_modes", [])),
        theta_const=(
            float(init_tab["theta_const"]) if "theta_const" in init_tab else None
        ),
        theta_modes=tuple(float(v) for v in init_tab.get("theta_modes", [])),
        scale=float(init_tab.get("scale", 1.0)),
        theta_scale=float(init_tab.get("theta_scale", 1.0)),
    )

    time_tab = _require(raw, "<top level>", "time")
    _check_keys("time", time_tab, _SECTION_KEYS["time"])
    t_end = float(_require(time_tab, "time", "t_end"))
    dt_init = float(_require(time_tab, "time", "dt_init"))
    cfl_fraction = float(time_tab.get("cfl_fraction", 0.4))
    sample_interval = float(_require(time_tab, "time", "sample_interval"))

    scheme_tab = raw.get("scheme", {})
    _check_keys("scheme", scheme_tab, _SECTION_KEYS["scheme"])
    order = int(scheme_tab.get("order", 1))
    if order not in (1, 2):
        raise ValueError(f"scheme order must be 1 or 2, got {order}")

    monitors_tab = raw.get("monitors", {})
    _check_keys("monitors", monitors_tab, _SECTION_KEYS["monitors"])
    weight_overrides = {
        name: float(monitors_tab[name])
        for name in ("w_u_p", "w_theta_p", "w_u_p2")
        if name in monitors_tab
    }
    ledger_tab = monitors_tab.get("ledger", {})
    _check_keys("monitors.ledger", ledger_tab, set(OVERRIDABLE_CONSTANTS))
    ledger_overrides = {name: float(value) for name, value in ledger_tab.items()}

    watchdog_tab = raw.get("watchdog", {})
    _check_keys("watchdog", watchdog_tab, _SECTION_KEYS["watchdog"])
    watchdog = WatchdogConfig(
        w1p_threshold=(
            float(watchdog_tab["w1p_threshold"])
            if "w1p_threshold" in watchdog_tab
            else None
        ),
        theta_inf_threshold=(
            float(watchdog_tab["theta_inf_threshold"])
            if "theta_inf_threshold" in watchdog_tab
            else None
        ),
    )

    output_tab = raw.get("output", {})
    _check_keys("output", output_tab, _SECTION_KEYS["output"])
    output_dir = output_tab.get("directory")

    run_tab = raw.get("run", {})
    _check_keys("run", run_tab, _SECTION_KEYS["run"])
    seed = int(run_tab.get("seed", 0))
    max_steps = int(run_tab.get("max_steps", 10_000_000))

    return ScenarioConfig(
        grid=grid,
        params=params,
        spec=spec,
        initial=initial,
        t_end=t_end,
        dt_init=dt_init,
        cfl_fraction=cfl_fraction,
        sample_interval=sample_interval,
        order=order,
        weight_overrides=weight_overrides,
        ledger_overrides=ledger_overrides,
        watchdog=watchdog,
        output_dir=output_dir,
        seed=seed,
        max_steps=max_steps,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse a scenario TOML file."""
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    return parse_scenario(raw)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepAxis:
    """One override axis: a dotted path into the scenario and its values."""

    path: str
    values: tuple[Any, ...]

    def __post_init__(self) -> None:
        if not self.path or "." not in self.path:
            raise ValueError(
                f"axis path must be dotted (section.key), got {self.path!r}"
            )
        if len(self.values) == 0:
            raise ValueError(f"axis {self.path!r} has no values")


@dataclass(frozen=True)
class SweepConfig:
    """A base scenario plus override axes whose cross product forms the cells."""

    base_raw: dict
    axes: tuple[SweepAxis, ...]
    parallelism: int = 1
    max_runs: int | None = None

    def cells(self) -> list[dict]:
        """Materialized raw scenario dicts, one per cell, in grid order."""
        import itertools

        combos = itertools.product(*[axis.values for axis in self.axes])
        out = []
        for combo in combos:
            if self.max_runs is not None and len(out) >= self.max_runs:
                break
            raw = copy.deepcopy(self.base_raw)
            for axis, value in zip(self.axes, combo):
                apply_override(raw, axis.path, value)
            out.append(raw)
        return out


def parse_sweep(raw: Mapping[str, Any], base_raw: dict) -> SweepConfig:
    """Validate a sweep dict against its already-loaded base scenario."""
    allowed = {"base", "parallelism", "max_runs", "axes"}
    _check_keys("<sweep top level>", raw, allowed)
    axes = []
    for entry in raw.get("axes", []):
        _check_keys("axes", entry, {"path", "values"})
        axes.append(
            SweepAxis(
                path=str(_require(entry, "axes", "path")),
                values=tuple(_require(entry, "axes", "values")),
            )
        )
    if not axes:
        raise ValueError("a sweep needs at least one [[axes]] entry")
    parallelism = int(raw.get("parallelism", 1))
    if parallelism < 1:
        raise ValueError(f"parallelism must be at least 1, got {parallelism}")
    max_runs = raw.get("max_runs")
    if max_runs is not None:
        max_runs = int(max_runs)
        if max_runs < 1:
            raise ValueError(f"max_runs must be at least 1, got {max_runs}")
    return SweepConfig(
        base_raw=base_raw, axes=tuple(axes), parallelism=parallelism, max_runs=max_runs
    )


def load_sweep(path: str | Path) -> SweepConfig:
    """Parse a sweep TOML file, resolving its base scenario relative to it."""
    path = Path(path)
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    base_name = raw.get("base")
    if not base_name:
        raise ValueError("sweep file must name a 'base' scenario TOML")
    base_path = (path.parent / base_name).resolve()
    with open(base_path, "rb") as handle:
        base_raw = tomllib.load(handle)
    parse_scenario(base_raw)  # fail fast on a broken base
    return parse_sweep(raw, base_raw)


def apply_override(raw: dict, dotted_path: str, value: Any) -> None:
    """Set a nested key in a raw scenario dict by dotted path (creating tables)."""
    parts = dotted_path.split(".")
    if any(not part for part in parts) or len(parts) < 2:
        raise ValueError(f"invalid override path {dotted_path!r}")
    table = raw
    for part in parts[:-1]:
        nxt = table.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ValueError(
                f"override path {dotted_path!r} collides with non-table {part!r}"
            )
        table = nxt
    table[parts[-1]] = value


# ---------------------------------------------------------------------------
# Minimal TOML emitter (for resolved-config artifacts)
# ---------------------------------------------------------------------------


def _format_toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            raise ValueError(f"cannot emit non-finite float {value} as TOML")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot emit {type(value).__name__} as TOML")


def emit_toml(data: Mapping[str, Any]) -> str:
    """Serialize a nested dict of scalars/lists/tables to TOML text."""
    lines: list[str] = []

    def walk(table: Mapping[str, Any], prefix: str) -> None:
        scalars = {k: v for k, v in table.items() if not isinstance(v, dict)}
        subtables = {k: v for k, v in table.items() if isinstance(v, dict)}
        if prefix and scalars:
            lines.append(f"[{prefix}]")
        for key, value in scalars.items():
            lines.append(f"{key} = {_format_toml_value(value)}")
        if prefix and scalars:
            lines.append("")
        for key, sub in subtables.items():
            if not sub:
                continue
            walk(sub, f"{prefix}.{key}" if prefix else key)

    top_scalars = {k: v for k, v in data.items() if not isinstance(v, dict)}
    for key, value in top_scalars.items():
        lines.append(f"{key} = {_format_toml_value(value)}")
    if top_scalars:
        lines.append("")
    for key, sub in data.items():
        if isinstance(sub, dict) and sub:
            walk(sub, key)
    return "\n".join(lines).rstrip("\n") + "\n"
