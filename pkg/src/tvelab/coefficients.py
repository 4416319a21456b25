"""Temperature-dependent material laws and bulk model parameters.

Four material functions of the temperature enter the model: the
momentum-diffusion coefficient (``viscosity``), the nonnegative weight of the
quadratic frictional heating term (``heating``), the temperature-induced
stress vector whose divergence forces the momentum balance (``stress``), and
the vector coupling the strain rate linearly into the heat balance
(``coupling``).  All four are polynomials (constants included): polynomial
specs keep derivatives exact, reduce the coupling-vanishes-at-zero check to a
constant-term test, and serialize losslessly in configuration files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "TemperatureRangeError",
    "ModelParams",
    "CoefficientSpec",
    "CoefficientValues",
    "CoefficientViolation",
    "SmallnessReport",
    "smallness_report",
    "polynomial_extrema",
    "vector_magnitude_range",
    "temperature_interval",
    "default_check_range",
]

#: Most negative temperature accepted as round-off noise before evaluation.
TEMPERATURE_TOLERANCE = -1e-10

PolyLike = Union[float, int, Sequence[float], Polynomial]


class TemperatureRangeError(ValueError):
    """A temperature argument is more negative than round-off tolerance."""


def _as_polynomial(value: PolyLike) -> Polynomial:
    """Coerce a constant or an ascending coefficient sequence to a polynomial."""
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, float)):
        return Polynomial([float(value)])
    coeffs = [float(c) for c in value]
    if not coeffs:
        raise ValueError("empty polynomial coefficient list")
    return Polynomial(coeffs)


def _as_polynomial_vector(value: Iterable[PolyLike]) -> tuple[Polynomial, ...]:
    polys = tuple(_as_polynomial(item) for item in value)
    if not polys:
        raise ValueError("vector coefficient spec needs at least one component")
    return polys


@dataclass(frozen=True)
class ModelParams:
    """Bulk parameters of the damped wave-heat system.

    Attributes:
        a: Damping rate coupling the displacement and velocity equations.
        D: Thermal diffusivity of the heat balance.
        p: Exponent of the gradient integrals tracked by the monitors.
        dim: Spatial dimension (1 or 2).
        theta_star: Background temperature about which the run is set up.
    """

    a: float
    D: float
    p: float
    dim: int
    theta_star: float

    def __post_init__(self) -> None:
        if not (self.a > 0):
            raise ValueError("damping rate a must be positive")
        if not (self.D > 0):
            raise ValueError("thermal diffusivity D must be positive")
        if self.dim not in (1, 2):
            raise ValueError("spatial dimension must be 1 or 2")
        if not (self.p >= 2):
            raise ValueError("gradient exponent p must be at least 2")
        if not (self.p > self.dim):
            raise ValueError("gradient exponent p must exceed the spatial dimension")
        if not (self.theta_star >= 0):
            raise ValueError("background temperature must be nonnegative")


@dataclass(frozen=True)
class CoefficientValues:
    """Pointwise evaluation of all material laws (scalars or arrays)."""

    viscosity: np.ndarray | float
    viscosity_prime: np.ndarray | float
    heating: np.ndarray | float
    stress: tuple[np.ndarray | float, ...]
    stress_prime: tuple[np.ndarray | float, ...]
    coupling: tuple[np.ndarray | float, ...]


@dataclass(frozen=True)
class CoefficientViolation:
    """One violated structural requirement found by :meth:`CoefficientSpec.validate`."""

    check: str
    message: str
    theta: float | None = None
    component: int | None = None


@dataclass(frozen=True)
class CoefficientSpec:
    """Immutable bundle of the four temperature-dependent material laws."""

    viscosity: Polynomial
    heating: Polynomial
    stress: tuple[Polynomial, ...]
    coupling: tuple[Polynomial, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "viscosity", _as_polynomial(self.viscosity))
        object.__setattr__(self, "heating", _as_polynomial(self.heating))
        object.__setattr__(self, "stress", _as_polynomial_vector(self.stress))
        object.__setattr__(self, "coupling", _as_polynomial_vector(self.coupling))
        if len(self.stress) != len(self.coupling):
            raise ValueError(
                "stress and coupling vectors must have the same number of components"
            )

    @classmethod
    def from_lists(
        cls,
        viscosity: PolyLike,
        heating: PolyLike,
        stress: Iterable[PolyLike],
        coupling: Iterable[PolyLike],
    ) -> "CoefficientSpec":
        """Build a spec from constants or ascending coefficient lists."""
        return cls(
            viscosity=_as_polynomial(viscosity),
            heating=_as_polynomial(heating),
            stress=_as_polynomial_vector(stress),
            coupling=_as_polynomial_vector(coupling),
        )

    @property
    def components(self) -> int:
        """Number of vector components shared by stress and coupling."""
        return len(self.stress)

    @property
    def viscosity_prime(self) -> Polynomial:
        """Exact derivative of the viscosity polynomial."""
        return self.viscosity.deriv()

    @property
    def stress_prime(self) -> tuple[Polynomial, ...]:
        """Exact componentwise derivative of the stress vector."""
        return tuple(poly.deriv() for poly in self.stress)

    def evaluate(self, theta: np.ndarray | float) -> CoefficientValues:
        """Evaluate every material law and derivative at the given temperature.

        Args:
            theta: Temperature value(s).  Values in ``[-1e-10, 0)`` are
                treated as round-off noise and clamped to zero.

        Returns:
            All six evaluations, each matching the shape of ``theta``.

        Raises:
            TemperatureRangeError: A temperature is below ``-1e-10``.
        """
        arr = np.asarray(theta, dtype=float)
        if float(np.min(arr, initial=np.inf)) < TEMPERATURE_TOLERANCE:
            raise TemperatureRangeError(
                "temperature negativity beyond tolerance: min value "
                f"{float(np.min(arr)):.6g}"
            )
        clamped = np.maximum(arr, 0.0)
        if arr.ndim == 0:
            clamped_val: np.ndarray | float = float(clamped)
        else:
            clamped_val = clamped
        values = CoefficientValues(
            viscosity=self.viscosity(clamped_val),
            viscosity_prime=self.viscosity_prime(clamped_val),
            heating=self.heating(clamped_val),
            stress=tuple(poly(clamped_val) for poly in self.stress),
            stress_prime=tuple(poly(clamped_val) for poly in self.stress_prime),
            coupling=tuple(poly(clamped_val) for poly in self.coupling),
        )
        for item in (values.viscosity, values.heating, *values.stress, *values.coupling):
            if not np.all(np.isfinite(item)):
                raise ValueError("non-finite coefficient value")
        return values

    def validate(self, theta_max_check: float, samples: int = 2001) -> list[CoefficientViolation]:
        """Check the structural requirements on a dense temperature grid.

        Requirements: positive viscosity and nonnegative heating on
        ``[0, theta_max_check]``, and a coupling vector that vanishes exactly
        at zero temperature (zero constant term, componentwise).

        Args:
            theta_max_check: Upper end of the temperature range to sample.
            samples: Number of sample points (at least 1000 are used).

        Returns:
            One entry per violated requirement; empty when all hold.
        """
        if not (theta_max_check > 0):
            raise ValueError("theta_max_check must be positive")
        grid = np.linspace(0.0, float(theta_max_check), max(int(samples), 1000))
        violations: list[CoefficientViolation] = []

        visc = self.viscosity(grid)
        bad = np.nonzero(~(visc > 0.0))[0]
        if bad.size:
            theta_bad = float(grid[bad[0]])
            violations.append(
                CoefficientViolation(
                    check="viscosity_positive",
                    message=f"viscosity is non-positive at temperature ~ {theta_bad:.6g}",
                    theta=theta_bad,
                )
            )

        heat = self.heating(grid)
        bad = np.nonzero(heat < 0.0)[0]
        if bad.size:
            theta_bad = float(grid[bad[0]])
            violations.append(
                CoefficientViolation(
                    check="heating_nonnegative",
                    message=f"heating weight is negative at temperature ~ {theta_bad:.6g}",
                    theta=theta_bad,
                )
            )

        for idx, poly in enumerate(self.coupling):
            if poly.coef[0] != 0.0:
                violations.append(
                    CoefficientViolation(
                        check="coupling_zero_at_zero",
                        message=(
                            "coupling vector does not vanish at zero temperature "
                            f"(component {idx}, constant term {poly.coef[0]:.6g})"
                        ),
                        theta=0.0,
                        component=idx,
                    )
                )
        return violations


@dataclass(frozen=True)
class SmallnessReport:
    """The two dimensionless ratios gating the small-data decay regime."""

    ratio_damping: float
    ratio_coupling: float
    delta_p: float
    damping_small: bool
    coupling_small: bool


def smallness_report(
    spec: CoefficientSpec,
    params: ModelParams,
    delta_p: float | object,
) -> SmallnessReport:
    """Evaluate the two smallness ratios at the background temperature.

    ``ratio_damping`` compares the damping rate against the viscosity at the
    background temperature; ``ratio_coupling`` compares the product of the
    stress sensitivity and the coupling magnitude against the product of the
    thermal diffusivity and the viscosity.  Euclidean norms are used for the
    vector quantities.

    Args:
        spec: Material laws.
        params: Bulk parameters.
        delta_p: Smallness threshold, either as a float or as any object with
            a ``delta_p`` attribute (e.g. a constants ledger).

    Returns:
        Both ratios, the threshold, and the two comparison booleans.

    Raises:
        ValueError: The viscosity is non-positive at the background
            temperature.
    """
    threshold = float(getattr(delta_p, "delta_p", delta_p))
    theta_star = params.theta_star
    visc = float(spec.viscosity(theta_star))
    if visc <= 0.0:
        raise ValueError(
            "viscosity must be positive at the background temperature "
            f"(got {visc:.6g} at {theta_star:.6g})"
        )
    stress_sensitivity = math.sqrt(
        sum(float(poly(theta_star)) ** 2 for poly in spec.stress_prime)
    )
    coupling_magnitude = math.sqrt(
        sum(float(poly(theta_star)) ** 2 for poly in spec.coupling)
    )
    ratio_damping = params.a / visc
    ratio_coupling = stress_sensitivity * coupling_magnitude / (params.D * visc)
    return SmallnessReport(
        ratio_damping=ratio_damping,
        ratio_coupling=ratio_coupling,
        delta_p=threshold,
        damping_small=ratio_damping <= threshold,
        coupling_small=ratio_coupling <= threshold,
    )


def polynomial_extrema(poly: Polynomial, interval: tuple[float, float]) -> tuple[float, float]:
    """Exact (min, max) of a polynomial over a closed interval.

    Candidates are the interval endpoints plus the real roots of the
    derivative inside the interval, so the result is exact up to root-finding
    round-off rather than a sampling estimate.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise ValueError("interval upper end below lower end")
    candidates = [lo, hi]
    derivative = poly.deriv()
    if derivative.degree() >= 1 and np.any(derivative.coef != 0.0):
        for root in np.atleast_1d(derivative.roots()):
            real = float(np.real(root))
            if abs(float(np.imag(root))) <= 1e-9 * max(1.0, abs(real)) and lo <= real <= hi:
                candidates.append(real)
    values = [float(poly(c)) for c in candidates]
    return min(values), max(values)


def vector_magnitude_range(
    polys: Sequence[Polynomial], interval: tuple[float, float]
) -> tuple[float, float]:
    """Exact (min, max) of the Euclidean magnitude of a polynomial vector.

    Works through the scalar polynomial ``sum of squared components``, whose
    extrema are found exactly, then takes square roots.
    """
    squared = Polynomial([0.0])
    for poly in polys:
        squared = squared + poly * poly
    lo, hi = polynomial_extrema(squared, interval)
    return math.sqrt(max(lo, 0.0)), math.sqrt(max(hi, 0.0))


def temperature_interval(theta_star: float, initial_deviation: float) -> tuple[float, float]:
    """Temperature interval the coefficient bookkeeping takes extrema over.

    The half-width is twice the initial sup-norm deviation from the
    background temperature, floored at a small fraction of the temperature
    scale so constant initial data still yields a nondegenerate interval.
    """
    half_width = max(2.0 * float(initial_deviation), 1e-3 * max(1.0, float(theta_star)))
    return max(0.0, float(theta_star) - half_width), float(theta_star) + half_width


def default_check_range(theta_star: float, initial_amplitude: float) -> float:
    """Default upper end for positivity validation of the material laws.

    Temperatures stay near the background value in the supported small-data
    regime, so ten initial amplitudes above the background is a generous
    validation range.
    """
    value = float(theta_star) + 10.0 * float(initial_amplitude)
    return value if value > 0 else 1.0
