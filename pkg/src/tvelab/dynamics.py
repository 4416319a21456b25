"""Right-hand-side assembly for the damped wave-heat system.

The evolved unknowns are the velocity-like variable ``v``, the displacement
``u``, and the temperature ``theta``; ``v`` carries the combination
``u_t + a*u`` so the system is first order in time:

* ``dv     = div(viscosity(theta) * grad v) + a*v - a^2*u + div(stress(theta))``
* ``du     = v - a*u``
* ``dtheta = D * lap(theta) + heating(theta)*|w|^2 + coupling(theta) . w``

with ``w = grad v - a * grad u`` the strain rate.  Both divergence-form terms
are discretized conservatively (face-averaged viscosity, face-interpolated
stress), which makes the discrete mass identity hold to round-off: the cell
sum of ``dv - a*du`` equals the boundary flux of the stress vector exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coefficients import CoefficientSpec, ModelParams, TemperatureRangeError
from .grid import (
    Grid,
    ScalarField,
    VectorField,
    boundary_flux_value,
    divergence_arrays,
    gradient_arrays,
    laplacian_arrays,
    weighted_diffusion_arrays,
)

__all__ = [
    "SimState",
    "RhsSplit",
    "RhsResult",
    "substitute",
    "recover_ut",
    "rhs",
    "strain_rate_arrays",
    "heat_source_arrays",
    "stress_divergence_arrays",
    "stress_boundary_flux",
    "mass_total",
]


@dataclass(frozen=True)
class SimState:
    """Complete simulation state at one instant.

    Invariants: the three fields share one grid, all values are finite
    (enforced by the field types), the temperature is at worst round-off
    negative, and the time is nonnegative.
    """

    v: ScalarField
    u: ScalarField
    theta: ScalarField
    t: float

    def __post_init__(self) -> None:
        if not (self.v.grid == self.u.grid == self.theta.grid):
            raise ValueError("state fields live on mismatched grids")
        if not (self.t >= 0.0):
            raise ValueError("time must be nonnegative")
        theta_min = float(np.min(self.theta.values))
        if theta_min < -1e-10:
            raise TemperatureRangeError(
                f"temperature negativity beyond tolerance: min value {theta_min:.6g}"
            )

    @property
    def grid(self) -> Grid:
        return self.v.grid

    def with_fields(
        self,
        v: ScalarField | None = None,
        u: ScalarField | None = None,
        theta: ScalarField | None = None,
        t: float | None = None,
    ) -> "SimState":
        """Copy of this state with any subset of components replaced."""
        return replace(
            self,
            v=self.v if v is None else v,
            u=self.u if u is None else u,
            theta=self.theta if theta is None else theta,
            t=self.t if t is None else t,
        )


@dataclass(frozen=True)
class RhsSplit:
    """Stiff/nonstiff decomposition of the tendencies for IMEX stepping."""

    dv_stiff: ScalarField
    dtheta_stiff: ScalarField
    dv_nonstiff: ScalarField
    du: ScalarField
    dtheta_nonstiff: ScalarField


@dataclass(frozen=True)
class RhsResult:
    """Assembled tendencies plus their stiff/nonstiff split."""

    dv: ScalarField
    du: ScalarField
    dtheta: ScalarField
    split: RhsSplit


def substitute(u: ScalarField, u_t: ScalarField, a: float) -> ScalarField:
    """Combine displacement and its rate into the evolved velocity variable.

    Args:
        u: Displacement field.
        u_t: Time derivative of the displacement.
        a: Damping rate.

    Returns:
        ``u_t + a * u`` pointwise.

    Raises:
        ValueError: The fields live on different grids.
    """
    if u.grid != u_t.grid:
        raise ValueError("grid mismatch between displacement and its rate")
    return ScalarField(u.grid, u_t.values + a * u.values)


def recover_ut(v: ScalarField, u: ScalarField, a: float) -> ScalarField:
    """Invert :func:`substitute`: recover the displacement rate ``v - a*u``."""
    if u.grid != v.grid:
        raise ValueError("grid mismatch between velocity variable and displacement")
    return ScalarField(u.grid, v.values - a * u.values)


def strain_rate_arrays(
    grid: Grid, v: np.ndarray, u: np.ndarray, a: float
) -> tuple[np.ndarray, ...]:
    """Componentwise strain rate ``grad v - a * grad u`` as raw arrays."""
    grad_v = gradient_arrays(grid, v)
    grad_u = gradient_arrays(grid, u)
    return tuple(gv - a * gu for gv, gu in zip(grad_v, grad_u))


def heat_source_arrays(
    grid: Grid,
    strain_rate: tuple[np.ndarray, ...],
    theta: np.ndarray,
    spec: CoefficientSpec,
) -> np.ndarray:
    """Nonstiff heat production: quadratic frictional term plus linear coupling."""
    values = spec.evaluate(theta)
    magnitude_sq = np.zeros(grid.shape)
    linear = np.zeros(grid.shape)
    for component, coupling in zip(strain_rate, values.coupling):
        magnitude_sq += component * component
        linear += coupling * component
    return values.heating * magnitude_sq + linear


def stress_divergence_arrays(
    grid: Grid, theta: np.ndarray, spec: CoefficientSpec
) -> np.ndarray:
    """Conservative divergence of the temperature-induced stress vector."""
    values = spec.evaluate(theta)
    components = tuple(np.broadcast_to(comp, grid.shape).astype(float) for comp in values.stress)
    return divergence_arrays(grid, components)


def stress_boundary_flux(grid: Grid, theta: np.ndarray, spec: CoefficientSpec) -> float:
    """Net outward boundary flux of the stress vector (drives the mass balance)."""
    values = spec.evaluate(theta)
    components = tuple(np.broadcast_to(comp, grid.shape).astype(float) for comp in values.stress)
    return boundary_flux_value(grid, components)


def mass_total(state: SimState, a: float) -> float:
    """Conserved-up-to-boundary-flux total: cell sum of ``v - a*u`` times volume."""
    grid = state.grid
    return float(np.sum(state.v.values - a * state.u.values)) * grid.cell_volume


def rhs(state: SimState, spec: CoefficientSpec, params: ModelParams) -> RhsResult:
    """Assemble all three tendencies and their stiff/nonstiff split.

    Args:
        state: Current fields and time.
        spec: Material laws (their vector components must match the grid
            dimension).
        params: Bulk parameters.

    Returns:
        Tendencies for the velocity variable, displacement, and temperature,
        plus the split separating the two diffusion terms (implicit
        candidates) from everything else.

    Raises:
        ValueError: Vector coefficient components do not match the grid
            dimension, or a non-finite intermediate appears.
    """
    grid = state.grid
    if spec.components != grid.dim:
        raise ValueError(
            f"stress/coupling vectors have {spec.components} components "
            f"but the grid dimension is {grid.dim}"
        )
    v = state.v.values
    u = state.u.values
    theta = state.theta.values

    values = spec.evaluate(theta)
    viscosity = np.broadcast_to(values.viscosity, grid.shape).astype(float)

    dv_stiff = weighted_diffusion_arrays(grid, viscosity, v)
    dtheta_stiff = params.D * laplacian_arrays(grid, theta)

    strain_rate = strain_rate_arrays(grid, v, u, params.a)
    dv_nonstiff = (
        params.a * v - params.a**2 * u + stress_divergence_arrays(grid, theta, spec)
    )
    du = v - params.a * u
    dtheta_nonstiff = heat_source_arrays(grid, strain_rate, theta, spec)

    split = RhsSplit(
        dv_stiff=ScalarField(grid, dv_stiff),
        dtheta_stiff=ScalarField(grid, dtheta_stiff),
        dv_nonstiff=ScalarField(grid, dv_nonstiff),
        du=ScalarField(grid, du),
        dtheta_nonstiff=ScalarField(grid, dtheta_nonstiff),
    )
    return RhsResult(
        dv=ScalarField(grid, dv_stiff + dv_nonstiff),
        du=split.du,
        dtheta=ScalarField(grid, dtheta_stiff + dtheta_nonstiff),
        split=split,
    )
