"""Oracle and invariant tests for right-hand-side assembly."""

from __future__ import annotations

import numpy as np
import pytest

from tvelab.coefficients import CoefficientSpec, ModelParams, TemperatureRangeError
from tvelab.dynamics import (
    SimState,
    mass_total,
    recover_ut,
    rhs,
    stress_boundary_flux,
    substitute,
)
from tvelab.grid import Grid, ScalarField, integral


def grid_1d(n: int = 128) -> Grid:
    return Grid(dim=1, lengths=(1.0,), cells=(n,))


def smooth_state(grid: Grid, seed: int = 0, theta_base: float = 1.0) -> SimState:
    rng = np.random.default_rng(seed)
    coords = grid.coordinate_fields()
    def series() -> np.ndarray:
        vals = np.zeros(grid.shape)
        for k in range(1, 5):
            if grid.dim == 1:
                vals += rng.uniform(-1, 1) * np.cos(k * np.pi * coords[0])
            else:
                vals += rng.uniform(-1, 1) * np.cos(k * np.pi * coords[0]) * np.cos(
                    k * np.pi * coords[1]
                )
        return vals
    return SimState(
        v=ScalarField(grid, 0.1 * series()),
        u=ScalarField(grid, 0.1 * series()),
        theta=ScalarField(grid, theta_base + 0.05 * series()),
        t=0.0,
    )


def full_spec() -> CoefficientSpec:
    # viscosity 1+theta, heating theta, stress (theta,), coupling (theta,)
    return CoefficientSpec.from_lists(
        viscosity=[1.0, 1.0],
        heating=[0.0, 1.0],
        stress=[[0.0, 1.0]],
        coupling=[[0.0, 1.0]],
    )


class TestSubstitution:
    def test_trivial(self) -> None:
        g = grid_1d(16)
        zero = ScalarField.full(g, 0.0)
        assert np.all(substitute(zero, zero, 2.0).values == 0.0)

    def test_pointwise_arithmetic(self) -> None:
        g = grid_1d(16)
        u = ScalarField.full(g, 1.0)
        ut = ScalarField.full(g, 3.0)
        v = substitute(u, ut, 2.0)
        assert np.all(v.values == 5.0)
        back = recover_ut(v, u, 2.0)
        assert np.all(back.values == 3.0)

    def test_round_trip_random(self) -> None:
        rng = np.random.default_rng(1)
        g = grid_1d(64)
        u = ScalarField(g, rng.normal(size=g.shape))
        ut = ScalarField(g, rng.normal(size=g.shape))
        back = recover_ut(substitute(u, ut, 0.37), u, 0.37)
        np.testing.assert_allclose(back.values, ut.values, rtol=0, atol=1e-14)

    def test_grid_mismatch(self) -> None:
        u = ScalarField.full(grid_1d(16), 0.0)
        ut = ScalarField.full(grid_1d(32), 0.0)
        with pytest.raises(ValueError, match="grid mismatch"):
            substitute(u, ut, 1.0)


class TestSimState:
    def test_negativity_rejected(self) -> None:
        g = grid_1d(16)
        zero = ScalarField.full(g, 0.0)
        with pytest.raises(TemperatureRangeError):
            SimState(v=zero, u=zero, theta=ScalarField.full(g, -1e-8), t=0.0)

    def test_roundoff_negativity_tolerated(self) -> None:
        g = grid_1d(16)
        zero = ScalarField.full(g, 0.0)
        state = SimState(v=zero, u=zero, theta=ScalarField.full(g, -5e-11), t=0.0)
        assert state.t == 0.0

    def test_mismatched_grids(self) -> None:
        zero16 = ScalarField.full(grid_1d(16), 0.0)
        zero32 = ScalarField.full(grid_1d(32), 0.0)
        with pytest.raises(ValueError, match="mismatched grids"):
            SimState(v=zero16, u=zero32, theta=zero16, t=0.0)

    def test_with_fields(self) -> None:
        g = grid_1d(16)
        zero = ScalarField.full(g, 0.0)
        state = SimState(v=zero, u=zero, theta=zero, t=0.0)
        bumped = state.with_fields(t=1.5)
        assert bumped.t == 1.5 and bumped.v is zero


class TestRhs:
    def test_equilibrium_state(self) -> None:
        g = grid_1d(64)
        params = ModelParams(a=0.1, D=1.0, p=2.0, dim=1, theta_star=1.0)
        zero = ScalarField.full(g, 0.0)
        state = SimState(v=zero, u=zero, theta=ScalarField.full(g, 1.0), t=0.0)
        result = rhs(state, full_spec(), params)
        assert np.max(np.abs(result.dv.values)) <= 1e-14
        assert np.max(np.abs(result.du.values)) <= 1e-14
        assert np.max(np.abs(result.dtheta.values)) <= 1e-14

    def test_uniform_state(self) -> None:
        g = grid_1d(64)
        params = ModelParams(a=0.5, D=2.0, p=2.0, dim=1, theta_star=1.0)
        state = SimState(
            v=ScalarField.full(g, 3.0),
            u=ScalarField.full(g, 2.0),
            theta=ScalarField.full(g, 1.0),
            t=0.0,
        )
        result = rhs(state, full_spec(), params)
        expected_dv = 0.5 * 3.0 - 0.25 * 2.0
        np.testing.assert_allclose(result.dv.values, expected_dv, atol=1e-13)
        np.testing.assert_allclose(result.du.values, 3.0 - 0.5 * 2.0, atol=1e-13)
        np.testing.assert_allclose(result.dtheta.values, 0.0, atol=1e-13)

    def test_heat_eigenfunction_oracle(self) -> None:
        n = 256
        g = grid_1d(n)
        (x,) = g.coordinate_fields()
        spec = CoefficientSpec.from_lists(
            viscosity=1.0, heating=0.0, stress=[0.0], coupling=[0.0]
        )
        params = ModelParams(a=1e-8, D=1.0, p=2.0, dim=1, theta_star=0.0)
        state = SimState(
            v=ScalarField(g, np.cos(np.pi * x)),
            u=ScalarField.full(g, 0.0),
            theta=ScalarField.full(g, 0.0),
            t=0.0,
        )
        result = rhs(state, spec, params)
        exact = -(np.pi**2) * np.cos(np.pi * x)
        assert np.max(np.abs(result.dv.values - exact)) <= 5.0 * np.pi**2 / n**2 + 1e-7

    def test_mass_rate_matches_boundary_flux(self) -> None:
        for seed, dim in ((3, 1), (4, 2)):
            g = grid_1d(64) if dim == 1 else Grid(dim=2, lengths=(1.0, 1.0), cells=(24, 24))
            spec = (
                full_spec()
                if dim == 1
                else CoefficientSpec.from_lists(
                    viscosity=[1.0, 1.0],
                    heating=[0.0, 1.0],
                    stress=[[0.0, 1.0], [0.0, 0.5]],
                    coupling=[[0.0, 1.0], [0.0, 0.2]],
                )
            )
            params = ModelParams(a=0.3, D=1.0, p=3.0, dim=dim, theta_star=1.0)
            state = smooth_state(g, seed=seed)
            result = rhs(state, spec, params)
            rate = integral(result.dv) - params.a * integral(result.du)
            flux = stress_boundary_flux(g, state.theta.values, spec)
            assert abs(rate - flux) <= 1e-12 * max(1.0, abs(flux), abs(rate))

    def test_shift_invariance(self) -> None:
        g = grid_1d(64)
        params = ModelParams(a=0.7, D=1.0, p=2.0, dim=1, theta_star=1.0)
        state = smooth_state(g, seed=5)
        shift = 0.9
        shifted = state.with_fields(
            v=ScalarField(g, state.v.values + params.a * shift),
            u=ScalarField(g, state.u.values + shift),
        )
        base = rhs(state, full_spec(), params)
        moved = rhs(shifted, full_spec(), params)
        np.testing.assert_allclose(moved.dv.values, base.dv.values, atol=1e-12)
        np.testing.assert_allclose(moved.du.values, base.du.values, atol=1e-12)
        np.testing.assert_allclose(moved.dtheta.values, base.dtheta.values, atol=1e-12)

    def test_heating_source_nonnegative_without_coupling(self) -> None:
        g = grid_1d(64)
        spec = CoefficientSpec.from_lists(
            viscosity=1.0, heating=[0.5, 1.0], stress=[0.0], coupling=[0.0]
        )
        params = ModelParams(a=0.5, D=1.0, p=2.0, dim=1, theta_star=1.0)
        state = smooth_state(g, seed=6)
        result = rhs(state, spec, params)
        assert np.min(result.split.dtheta_nonstiff.values) >= 0.0

    def test_split_sums_to_total(self) -> None:
        g = grid_1d(64)
        params = ModelParams(a=0.3, D=1.5, p=2.0, dim=1, theta_star=1.0)
        state = smooth_state(g, seed=7)
        result = rhs(state, full_spec(), params)
        np.testing.assert_array_equal(
            result.dv.values,
            result.split.dv_stiff.values + result.split.dv_nonstiff.values,
        )
        np.testing.assert_array_equal(
            result.dtheta.values,
            result.split.dtheta_stiff.values + result.split.dtheta_nonstiff.values,
        )

    def test_component_mismatch(self) -> None:
        g = Grid(dim=2, lengths=(1.0, 1.0), cells=(8, 8))
        zero = ScalarField.full(g, 0.0)
        state = SimState(v=zero, u=zero, theta=ScalarField.full(g, 1.0), t=0.0)
        params = ModelParams(a=0.1, D=1.0, p=3.0, dim=2, theta_star=1.0)
        with pytest.raises(ValueError, match="components"):
            rhs(state, full_spec(), params)

    def test_mass_total(self) -> None:
        g = grid_1d(64)
        state = SimState(
            v=ScalarField.full(g, 2.0),
            u=ScalarField.full(g, 1.0),
            theta=ScalarField.full(g, 1.0),
            t=0.0,
        )
        assert mass_total(state, 0.5) == pytest.approx(1.5, abs=1e-14)
