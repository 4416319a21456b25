"""Oracle and invariant tests for the material-law module."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from tvelab.coefficients import (
    CoefficientSpec,
    ModelParams,
    TemperatureRangeError,
    default_check_range,
    polynomial_extrema,
    smallness_report,
    temperature_interval,
    vector_magnitude_range,
)


def trivial_spec() -> CoefficientSpec:
    return CoefficientSpec.from_lists(
        viscosity=1.0, heating=0.0, stress=[0.0], coupling=[0.0]
    )


class TestModelParams:
    def test_valid(self) -> None:
        params = ModelParams(a=0.5, D=1.0, p=2.0, dim=1, theta_star=1.0)
        assert params.p == 2.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(a=0.0, D=1.0, p=2.0, dim=1, theta_star=1.0),
            dict(a=1.0, D=-1.0, p=2.0, dim=1, theta_star=1.0),
            dict(a=1.0, D=1.0, p=1.5, dim=1, theta_star=1.0),
            dict(a=1.0, D=1.0, p=2.0, dim=2, theta_star=1.0),  # p must exceed dim
            dict(a=1.0, D=1.0, p=3.0, dim=3, theta_star=1.0),
            dict(a=1.0, D=1.0, p=2.0, dim=1, theta_star=-0.1),
        ],
    )
    def test_invalid(self, kwargs: dict) -> None:
        with pytest.raises(ValueError):
            ModelParams(**kwargs)


class TestEvaluate:
    def test_constant_viscosity(self) -> None:
        values = trivial_spec().evaluate(3.7)
        assert values.viscosity == 1.0
        assert values.viscosity_prime == 0.0

    def test_quadratic_viscosity(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=[1.0, 0.0, 1.0], heating=0.0, stress=[0.0], coupling=[0.0]
        )
        values = spec.evaluate(2.0)
        assert values.viscosity == pytest.approx(5.0)
        assert values.viscosity_prime == pytest.approx(4.0)

    def test_coupling_vanishes_at_zero(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=1.0,
            heating=0.0,
            stress=[[0.0, 1.0], 0.0],
            coupling=[[0.0, 1.0], 0.0],
        )
        values = spec.evaluate(0.0)
        assert values.coupling == (0.0, 0.0)

    def test_roundoff_negativity_clamped(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=[1.0, 1.0], heating=0.0, stress=[0.0], coupling=[0.0]
        )
        assert spec.evaluate(-5e-11).viscosity == 1.0

    def test_large_negativity_rejected(self) -> None:
        with pytest.raises(TemperatureRangeError, match="negativity beyond tolerance"):
            trivial_spec().evaluate(-1e-9)

    def test_array_arguments(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=[1.0, 2.0], heating=[0.5], stress=[[0.0, 1.0]], coupling=[[0.0, 3.0]]
        )
        theta = np.array([0.0, 1.0, 2.0])
        values = spec.evaluate(theta)
        np.testing.assert_allclose(values.viscosity, [1.0, 3.0, 5.0])
        np.testing.assert_allclose(values.stress[0], [0.0, 1.0, 2.0])
        np.testing.assert_allclose(values.coupling[0], [0.0, 3.0, 6.0])

    def test_derivative_matches_finite_difference(self) -> None:
        rng = np.random.default_rng(23)
        spec = CoefficientSpec.from_lists(
            viscosity=[2.0, -0.3, 0.05, 0.001],
            heating=[1.0, 0.2],
            stress=[[0.0, 0.7, -0.02], [0.0, 0.1]],
            coupling=[[0.0, 1.0], [0.0, 0.5]],
        )
        step = 1e-5
        for theta in rng.uniform(0.0, 10.0, size=100):
            plus = spec.evaluate(theta + step)
            minus = spec.evaluate(theta - step if theta >= step else 0.0)
            if theta < step:
                continue
            fd = (plus.viscosity - minus.viscosity) / (2 * step)
            exact = spec.evaluate(theta).viscosity_prime
            assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))
            for comp in range(2):
                fd_s = (plus.stress[comp] - minus.stress[comp]) / (2 * step)
                exact_s = spec.evaluate(theta).stress_prime[comp]
                assert abs(fd_s - exact_s) <= 1e-6 * max(1.0, abs(exact_s))

    def test_component_count_mismatch(self) -> None:
        with pytest.raises(ValueError, match="same number"):
            CoefficientSpec.from_lists(
                viscosity=1.0, heating=0.0, stress=[0.0, 0.0], coupling=[0.0]
            )


class TestValidate:
    def test_trivial_spec_clean(self) -> None:
        assert trivial_spec().validate(5.0) == []

    def test_viscosity_sign_change(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=[1.0, -1.0], heating=0.0, stress=[0.0], coupling=[0.0]
        )
        violations = spec.validate(2.0)
        assert len(violations) == 1
        assert violations[0].check == "viscosity_positive"
        assert violations[0].theta == pytest.approx(1.0, abs=0.01)

    def test_coupling_constant_term(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=1.0, heating=0.0, stress=[0.0, 0.0], coupling=[[1.0, 1.0], 0.0]
        )
        violations = spec.validate(1.0)
        assert [v.check for v in violations] == ["coupling_zero_at_zero"]
        assert violations[0].component == 0

    def test_negative_heating(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=1.0, heating=[0.5, -1.0], stress=[0.0], coupling=[0.0]
        )
        violations = spec.validate(2.0)
        assert [v.check for v in violations] == ["heating_nonnegative"]

    def test_bad_range(self) -> None:
        with pytest.raises(ValueError):
            trivial_spec().validate(0.0)


class TestSmallnessReport:
    def test_zero_stress(self) -> None:
        params = ModelParams(a=0.5, D=1.0, p=2.0, dim=1, theta_star=1.0)
        report = smallness_report(trivial_spec(), params, delta_p=1e-3)
        assert report.ratio_coupling == 0.0
        assert report.coupling_small is True

    def test_direct_damping_comparison(self) -> None:
        delta = 0.02
        params = ModelParams(a=delta / 2, D=1.0, p=2.0, dim=1, theta_star=1.0)
        report = smallness_report(trivial_spec(), params, delta_p=delta)
        assert report.ratio_damping == pytest.approx(delta / 2)
        assert report.damping_small is True

    def test_hand_evaluated_coupling_ratio(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=[1.0, 1.0],
            heating=0.0,
            stress=[[0.0, 1.0]],
            coupling=[[0.0, 1.0]],
        )
        params = ModelParams(a=0.1, D=1.0, p=2.0, dim=1, theta_star=1.0)
        report = smallness_report(spec, params, delta_p=1.0)
        assert report.ratio_coupling == pytest.approx(0.5)

    def test_ledger_like_object_accepted(self) -> None:
        class LedgerStub:
            delta_p = 0.25

        params = ModelParams(a=0.1, D=1.0, p=2.0, dim=1, theta_star=1.0)
        report = smallness_report(trivial_spec(), params, LedgerStub())
        assert report.delta_p == 0.25

    def test_reciprocal_scaling_invariance(self) -> None:
        params = ModelParams(a=0.1, D=2.0, p=2.0, dim=1, theta_star=1.5)
        for scale in (0.1, 3.0, 40.0):
            base = CoefficientSpec.from_lists(
                viscosity=[1.0, 0.5],
                heating=0.0,
                stress=[[0.0, 2.0]],
                coupling=[[0.0, 0.7]],
            )
            scaled = CoefficientSpec.from_lists(
                viscosity=[1.0, 0.5],
                heating=0.0,
                stress=[[0.0, 2.0 * scale]],
                coupling=[[0.0, 0.7 / scale]],
            )
            a = smallness_report(base, params, 1.0).ratio_coupling
            b = smallness_report(scaled, params, 1.0).ratio_coupling
            assert b == pytest.approx(a, rel=1e-12)

    def test_nonpositive_viscosity_rejected(self) -> None:
        spec = CoefficientSpec.from_lists(
            viscosity=[1.0, -1.0], heating=0.0, stress=[0.0], coupling=[0.0]
        )
        params = ModelParams(a=0.1, D=1.0, p=2.0, dim=1, theta_star=2.0)
        with pytest.raises(ValueError, match="positive at the background"):
            smallness_report(spec, params, 1.0)


class TestIntervalHelpers:
    def test_polynomial_extrema_parabola(self) -> None:
        poly = Polynomial([1.0, -2.0, 1.0])  # (theta - 1)^2
        lo, hi = polynomial_extrema(poly, (0.0, 3.0))
        assert lo == pytest.approx(0.0, abs=1e-14)
        assert hi == pytest.approx(4.0)

    def test_polynomial_extrema_constant_and_linear(self) -> None:
        assert polynomial_extrema(Polynomial([2.5]), (0.0, 1.0)) == (2.5, 2.5)
        lo, hi = polynomial_extrema(Polynomial([1.0, 2.0]), (0.0, 2.0))
        assert (lo, hi) == (1.0, 5.0)

    def test_vector_magnitude_range(self) -> None:
        polys = (Polynomial([0.0, 1.0]), Polynomial([1.0, -1.0]))
        lo, hi = vector_magnitude_range(polys, (0.0, 1.0))
        assert lo == pytest.approx(math.sqrt(0.5))
        assert hi == pytest.approx(1.0)

    def test_temperature_interval(self) -> None:
        assert temperature_interval(1.0, 0.01) == (0.98, 1.02)
        lo, hi = temperature_interval(1.0, 0.0)
        assert (lo, hi) == (0.999, 1.001)
        lo, hi = temperature_interval(0.0, 0.3)
        assert lo == 0.0 and hi == pytest.approx(0.6)

    def test_default_check_range(self) -> None:
        assert default_check_range(1.0, 0.1) == pytest.approx(2.0)
        assert default_check_range(0.0, 0.0) == 1.0
