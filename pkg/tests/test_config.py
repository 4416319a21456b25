"""Tests for TOML scenario/sweep parsing and the resolved-config emitter."""

import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np
import pytest

from tvelab.config import (
    InitialConditions,
    apply_override,
    emit_toml,
    load_scenario,
    load_sweep,
    parse_scenario,
)
from tvelab.grid import Grid


BASE_TOML = """
[grid]
lengths = [1.0]
cells = [16]

[model]
a = 0.05
D = 1.0
p = 2
theta_star = 1.0

[coefficients]
viscosity = [1.0]
heating = [1.0]
stress = [[0.0, 0.01]]
coupling = [[0.0, 0.01]]

[initial]
u0_modes = [0.01]
u0t_modes = [0.01]
theta_modes = [0.01]

[time]
t_end = 0.5
dt_init = 0.05
sample_interval = 0.1

[scheme]
order = 2

[run]
seed = 3
"""


def base_raw():
    return tomllib.loads(BASE_TOML)


class TestScenarioParsing:
    def test_minimal_scenario_types_and_defaults(self):
        config = parse_scenario(base_raw())
        assert config.grid == Grid(dim=1, lengths=(1.0,), cells=(16,))
        assert config.params.a == 0.05
        assert config.params.D == 1.0
        assert config.params.p == 2.0
        assert config.params.theta_star == 1.0
        assert config.spec.components == 1
        assert config.order == 2
        assert config.cfl_fraction == 0.4
        assert config.seed == 3
        assert config.max_steps == 10_000_000
        assert config.output_dir is None
        assert config.weight_overrides == {}
        assert config.ledger_overrides == {}
        assert config.watchdog.w1p_threshold is None

    def test_defaults_when_optional_sections_absent(self):
        raw = base_raw()
        del raw["scheme"]
        del raw["run"]
        del raw["initial"]
        config = parse_scenario(raw)
        assert config.order == 1
        assert config.seed == 0
        assert config.initial.u0_modes == ()
        assert config.initial.theta_const is None

    def test_missing_required_key_names_it(self):
        raw = base_raw()
        del raw["time"]["t_end"]
        with pytest.raises(ValueError, match="t_end"):
            parse_scenario(raw)

    def test_unknown_top_level_key_rejected(self):
        raw = base_raw()
        raw["mystery"] = {}
        with pytest.raises(ValueError, match="mystery"):
            parse_scenario(raw)

    def test_unknown_section_key_rejected(self):
        raw = base_raw()
        raw["time"]["dt_max"] = 0.1
        with pytest.raises(ValueError, match="dt_max"):
            parse_scenario(raw)

    def test_bad_order_rejected(self):
        raw = base_raw()
        raw["scheme"]["order"] = 3
        with pytest.raises(ValueError, match="order"):
            parse_scenario(raw)

    def test_dim_mismatch_rejected(self):
        raw = base_raw()
        raw["grid"]["dim"] = 2
        with pytest.raises(ValueError, match="inconsistent"):
            parse_scenario(raw)

    def test_component_count_mismatch_rejected(self):
        raw = base_raw()
        raw["coefficients"]["stress"] = [[0.0, 0.01], [0.0, 0.01]]
        raw["coefficients"]["coupling"] = [[0.0, 0.01], [0.0, 0.01]]
        with pytest.raises(ValueError, match="components"):
            parse_scenario(raw)

    def test_unknown_ledger_override_rejected(self):
        raw = base_raw()
        raw["monitors"] = {"ledger": {"nonsense": 1.0}}
        with pytest.raises(ValueError, match="nonsense"):
            parse_scenario(raw)

    def test_monitor_and_ledger_overrides_parsed(self):
        raw = base_raw()
        raw["monitors"] = {"w_u_p": 0.5, "ledger": {"C_P": 0.1, "K3": 2.0}}
        raw["watchdog"] = {"theta_inf_threshold": 50.0}
        config = parse_scenario(raw)
        assert config.weight_overrides == {"w_u_p": 0.5}
        assert config.ledger_overrides == {"C_P": 0.1, "K3": 2.0}
        assert config.watchdog.theta_inf_threshold == 50.0
        assert config.watchdog.w1p_threshold is None

    def test_load_scenario_reads_file(self, tmp_path):
        path = tmp_path / "scenario.toml"
        path.write_text(BASE_TOML)
        config = load_scenario(path)
        assert config.grid.cells == (16,)


class TestInitialConditions:
    def test_cosine_series_matches_manual_evaluation(self):
        config = parse_scenario(base_raw())
        grid = config.grid
        u0, u0t, v0, theta0 = config.initial.build(grid, config.params)
        x = grid.coordinate_fields()[0]
        expected_u0 = 0.01 * np.cos(np.pi * x)
        assert np.allclose(u0.values, expected_u0, atol=1e-15)
        assert np.allclose(u0t.values, expected_u0, atol=1e-15)
        assert np.allclose(theta0.values, 1.0 + expected_u0, atol=1e-15)
        assert np.allclose(
            v0.values, u0t.values + config.params.a * u0.values, atol=1e-16
        )

    def test_scale_multiplies_amplitudes(self):
        init = InitialConditions(u0_modes=(1.0,), scale=0.25)
        config = parse_scenario(base_raw())
        grid = config.grid
        u0, _, _, _ = init.build(grid, config.params)
        x = grid.coordinate_fields()[0]
        assert np.allclose(u0.values, 0.25 * np.cos(np.pi * x), atol=1e-15)

    def test_theta_const_defaults_to_reference_temperature(self):
        init = InitialConditions()
        config = parse_scenario(base_raw())
        _, _, _, theta0 = init.build(config.grid, config.params)
        assert np.all(theta0.values == config.params.theta_star)

    def test_multiple_modes_sum(self):
        init = InitialConditions(u0_modes=(0.5, 0.25))
        config = parse_scenario(base_raw())
        grid = config.grid
        u0, _, _, _ = init.build(grid, config.params)
        x = grid.coordinate_fields()[0]
        expected = 0.5 * np.cos(np.pi * x) + 0.25 * np.cos(2.0 * np.pi * x)
        assert np.allclose(u0.values, expected, atol=1e-15)

    def test_2d_product_modes_satisfy_neumann_structure(self):
        grid = Grid(dim=2, lengths=(1.0, 2.0), cells=(8, 12))
        raw = base_raw()
        raw["grid"] = {"lengths": [1.0, 2.0], "cells": [8, 12]}
        raw["model"]["p"] = 3
        raw["coefficients"]["stress"] = [[0.0, 0.01], [0.0, 0.01]]
        raw["coefficients"]["coupling"] = [[0.0, 0.01], [0.0, 0.01]]
        config = parse_scenario(raw)
        init = InitialConditions(theta_modes=(0.1,), theta_const=2.0)
        _, _, _, theta0 = init.build(grid, config.params)
        x, y = grid.coordinate_fields()
        expected = 2.0 + 0.1 * np.cos(np.pi * x / 1.0) * np.cos(np.pi * y / 2.0)
        assert np.allclose(theta0.values, expected, atol=1e-15)


class TestResolvedDictAndEmitter:
    def test_resolved_roundtrip_through_toml(self):
        config = parse_scenario(base_raw())
        resolved = config.resolved_dict()
        text = emit_toml(resolved)
        reparsed = parse_scenario(tomllib.loads(text))
        assert reparsed.resolved_dict() == resolved

    def test_resolved_roundtrip_with_overrides(self):
        raw = base_raw()
        raw["monitors"] = {"w_theta_p": 2.0, "ledger": {"K1": 3.0}}
        raw["watchdog"] = {"w1p_threshold": 10.0}
        raw["output"] = {"directory": "out/here"}
        config = parse_scenario(raw)
        resolved = config.resolved_dict()
        reparsed = parse_scenario(tomllib.loads(emit_toml(resolved)))
        assert reparsed.resolved_dict() == resolved
        assert resolved["monitors"]["ledger"] == {"K1": 3.0}
        assert resolved["watchdog"] == {"w1p_threshold": 10.0}
        assert resolved["output"] == {"directory": "out/here"}

    def test_emitter_handles_scalars_lists_and_nested_tables(self):
        data = {
            "alpha": {"flag": True, "count": 3, "rate": 1e-05, "name": 'say "hi"'},
            "beta": {"grid": {"values": [1.0, 2.5], "nested": [[0.0, 1.0], [2.0]]}},
        }
        parsed = tomllib.loads(emit_toml(data))
        assert parsed == data

    def test_emitter_rejects_non_finite_floats(self):
        with pytest.raises(ValueError, match="non-finite"):
            emit_toml({"x": {"bad": math.inf}})

    def test_emitter_rejects_unsupported_types(self):
        with pytest.raises(TypeError):
            emit_toml({"x": {"bad": object()}})


class TestOverridesAndSweeps:
    def test_apply_override_sets_nested_value(self):
        raw = base_raw()
        apply_override(raw, "model.a", 0.2)
        assert raw["model"]["a"] == 0.2

    def test_apply_override_creates_missing_tables(self):
        raw = base_raw()
        apply_override(raw, "watchdog.theta_inf_threshold", 9.0)
        assert raw["watchdog"]["theta_inf_threshold"] == 9.0

    def test_apply_override_rejects_flat_path(self):
        with pytest.raises(ValueError, match="dotted|invalid"):
            apply_override(base_raw(), "a", 1.0)

    def test_apply_override_rejects_scalar_collision(self):
        raw = base_raw()
        with pytest.raises(ValueError, match="collides"):
            apply_override(raw, "model.a.b", 1.0)

    def _write_sweep(self, tmp_path, extra=""):
        (tmp_path / "base.toml").write_text(BASE_TOML)
        sweep_text = (
            'base = "base.toml"\n'
            + extra
            + "[[axes]]\n"
            + 'path = "model.a"\n'
            + "values = [0.05, 0.1]\n"
            + "[[axes]]\n"
            + 'path = "initial.scale"\n'
            + "values = [1.0, 2.0, 3.0]\n"
        )
        path = tmp_path / "sweep.toml"
        path.write_text(sweep_text)
        return path

    def test_sweep_cells_cross_product_in_grid_order(self, tmp_path):
        sweep = load_sweep(self._write_sweep(tmp_path))
        cells = sweep.cells()
        assert len(cells) == 6
        seen = [
            (cell["model"]["a"], cell["initial"]["scale"]) for cell in cells
        ]
        assert seen == [
            (0.05, 1.0),
            (0.05, 2.0),
            (0.05, 3.0),
            (0.1, 1.0),
            (0.1, 2.0),
            (0.1, 3.0),
        ]

    def test_sweep_max_runs_truncates(self, tmp_path):
        sweep = load_sweep(self._write_sweep(tmp_path, extra="max_runs = 4\n"))
        assert len(sweep.cells()) == 4

    def test_sweep_cells_do_not_share_state(self, tmp_path):
        sweep = load_sweep(self._write_sweep(tmp_path))
        cells = sweep.cells()
        cells[0]["model"]["a"] = 99.0
        assert cells[1]["model"]["a"] == 0.05
        assert sweep.base_raw["model"]["a"] == 0.05

    def test_sweep_requires_axes(self, tmp_path):
        (tmp_path / "base.toml").write_text(BASE_TOML)
        path = tmp_path / "sweep.toml"
        path.write_text('base = "base.toml"\n')
        with pytest.raises(ValueError, match="axes"):
            load_sweep(path)

    def test_sweep_axis_path_must_be_dotted(self, tmp_path):
        (tmp_path / "base.toml").write_text(BASE_TOML)
        path = tmp_path / "sweep.toml"
        path.write_text(
            'base = "base.toml"\n[[axes]]\npath = "a"\nvalues = [1.0]\n'
        )
        with pytest.raises(ValueError, match="dotted"):
            load_sweep(path)

    def test_sweep_rejects_broken_base(self, tmp_path):
        (tmp_path / "base.toml").write_text("[grid]\nlengths = [1.0]\n")
        path = tmp_path / "sweep.toml"
        path.write_text(
            'base = "base.toml"\n[[axes]]\npath = "model.a"\nvalues = [1.0]\n'
        )
        with pytest.raises(ValueError):
            load_sweep(path)

    def test_sweep_parallelism_validation(self, tmp_path):
        (tmp_path / "base.toml").write_text(BASE_TOML)
        path = tmp_path / "sweep.toml"
        path.write_text(
            'base = "base.toml"\nparallelism = 0\n'
            '[[axes]]\npath = "model.a"\nvalues = [1.0]\n'
        )
        with pytest.raises(ValueError, match="parallelism"):
            load_sweep(path)
