"""Cell-centered tensor grids and Neumann-compatible discrete calculus.

Fields live at cell centers ``x_i = (i + 1/2) h`` of a uniform grid on an
interval (1D) or axis-aligned rectangle (2D).  All difference operators are
built for homogeneous Neumann (zero normal derivative) boundary conditions
using the mirror-ghost convention ``phi[-1] = phi[0]``:

* ``gradient`` — centered differences in the interior; the boundary-normal
  component at boundary cells is the one-sided difference across the wall,
  which vanishes identically under mirroring.  Tangential components stay
  centered at boundary cells.
* ``laplacian_neumann`` — conservative flux form with zero wall fluxes, so
  its cell sum telescopes to zero exactly and constants are exact kernels.
* ``divergence`` — conservative face form; interior face values are
  arithmetic means of the adjacent cells, wall faces are linearly
  extrapolated, so the discrete integral of the divergence equals the
  discrete boundary flux sum identically (see :func:`boundary_flux`).
* ``hessian_frobenius`` — pointwise Frobenius norm of the second-difference
  Hessian; boundary cells copy the adjacent interior normal second
  difference (keeps affine fields exactly second-difference-free).

Integrals use the midpoint rule: cell value times cell volume.  Pointwise
accuracy claims hold on interior cells; integral identities (zero Laplacian
sum, divergence/boundary-flux consistency) hold over all cells to round-off.

All operations are pure: they never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import NDArray


class NonFiniteFieldError(ValueError):
    """Raised when a field contains NaN or infinite entries."""


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on an interval or rectangle.

    Attributes:
        dim: Spatial dimension, 1 or 2.
        lengths: Domain edge lengths, one per dimension, all positive.
        cells: Cell counts per dimension, each at least 4.

    Raises:
        ValueError: If the dimension, lengths, or cell counts are invalid.
    """

    dim: int
    lengths: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.dim}")
        object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))
        object.__setattr__(self, "cells", tuple(int(N) for N in self.cells))
        if len(self.lengths) != self.dim or len(self.cells) != self.dim:
            raise ValueError(
                f"expected {self.dim} lengths and cell counts, got "
                f"{len(self.lengths)} and {len(self.cells)}"
            )
        if any(not math.isfinite(L) or L <= 0.0 for L in self.lengths):
            raise ValueError(f"domain lengths must be positive, got {self.lengths}")
        if any(N < 4 for N in self.cells):
            raise ValueError(f"need at least 4 cells per dimension, got {self.cells}")

    @property
    def spacing(self) -> tuple[float, ...]:
        """Cell width per dimension."""
        return tuple(L / N for L, N in zip(self.lengths, self.cells))

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of fields on this grid."""
        return self.cells

    @property
    def cell_count(self) -> int:
        """Total number of cells."""
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        """Volume (length/area) of a single cell."""
        return float(np.prod(self.spacing))

    def axis_centers(self, axis: int) -> "NDArray[np.float64]":
        """Cell-center coordinates along one axis.

        Args:
            axis: Axis index in ``range(dim)``.

        Returns:
            1D array of the ``cells[axis]`` center coordinates.
        """
        h = self.spacing[axis]
        return (np.arange(self.cells[axis], dtype=float) + 0.5) * h

    def coordinate_fields(self) -> tuple["NDArray[np.float64]", ...]:
        """Full coordinate arrays, one per dimension, each of shape ``cells``."""
        axes = [self.axis_centers(k) for k in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))


def _as_field_array(grid: Grid, values: object) -> "NDArray[np.float64]":
    arr = np.array(values, dtype=float, copy=True)
    if arr.shape != grid.shape:
        raise ValueError(f"field shape {arr.shape} does not match grid {grid.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteFieldError("non-finite field")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Immutable scalar field sampled at cell centers.

    Attributes:
        grid: The grid the samples live on.
        values: Real array of shape ``grid.cells``; copied and frozen on
            construction.  Units are the caller's business.

    Raises:
        NonFiniteFieldError: If any entry is NaN or infinite.
        ValueError: If the value shape does not match the grid.
    """

    grid: Grid
    values: "NDArray[np.float64]"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_field_array(self.grid, self.values))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        """Constant field."""
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(
        cls, grid: Grid, fn: Callable[..., "NDArray[np.float64]"]
    ) -> "ScalarField":
        """Field sampled from ``fn(x)`` (1D) or ``fn(x, y)`` (2D) at centers."""
        return cls(grid, np.asarray(fn(*grid.coordinate_fields()), dtype=float))


@dataclass(frozen=True)
class VectorField:
    """Immutable vector field sampled at cell centers, one array per component.

    The component count must equal the grid dimension.
    """

    grid: Grid
    components: tuple["NDArray[np.float64]", ...]

    def __post_init__(self) -> None:
        comps = tuple(_as_field_array(self.grid, c) for c in self.components)
        if len(comps) != self.grid.dim:
            raise ValueError(
                f"expected {self.grid.dim} components, got {len(comps)}"
            )
        object.__setattr__(self, "components", comps)


# ---------------------------------------------------------------------------
# Array-level kernels.  These operate on plain ndarrays so the time stepper
# can avoid per-step field-object overhead; the public operations below wrap
# them in the validated field types.
# ---------------------------------------------------------------------------


def gradient_arrays(grid: Grid, values: "NDArray[np.float64]") -> list["NDArray[np.float64]"]:
    """Per-axis gradient arrays (centered interior, zero normal at walls)."""
    comps: list[NDArray[np.float64]] = []
    for ax in range(grid.dim):
        h = grid.spacing[ax]
        d = np.zeros_like(values)
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        mid = [slice(None)] * grid.dim
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        mid[ax] = slice(1, -1)
        d[tuple(mid)] = (values[tuple(hi)] - values[tuple(lo)]) / (2.0 * h)
        comps.append(d)
    return comps


def laplacian_arrays(grid: Grid, values: "NDArray[np.float64]") -> "NDArray[np.float64]":
    """Conservative zero-flux Laplacian."""
    out = np.zeros_like(values)
    pad_spec = [(0, 0)] * grid.dim
    for ax in range(grid.dim):
        h = grid.spacing[ax]
        flux = np.diff(values, axis=ax) / h
        pad = list(pad_spec)
        pad[ax] = (1, 1)
        flux = np.pad(flux, pad)
        out += np.diff(flux, axis=ax) / h
    return out


def weighted_diffusion_arrays(
    grid: Grid, coeff: "NDArray[np.float64]", values: "NDArray[np.float64]"
) -> "NDArray[np.float64]":
    """Conservative div(coeff * grad(values)) with arithmetic face means.

    Wall fluxes are zero (Neumann), so the cell sum telescopes to zero.
    """
    out = np.zeros_like(values)
    pad_spec = [(0, 0)] * grid.dim
    for ax in range(grid.dim):
        h = grid.spacing[ax]
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        face_coeff = 0.5 * (coeff[tuple(lo)] + coeff[tuple(hi)])
        flux = face_coeff * (np.diff(values, axis=ax) / h)
        pad = list(pad_spec)
        pad[ax] = (1, 1)
        flux = np.pad(flux, pad)
        out += np.diff(flux, axis=ax) / h
    return out


def _axis_face_values(
    grid: Grid, comp: "NDArray[np.float64]", ax: int
) -> "NDArray[np.float64]":
    """All face values along ``ax`` (interior means, extrapolated walls)."""
    lo = [slice(None)] * grid.dim
    hi = [slice(None)] * grid.dim
    lo[ax] = slice(0, -1)
    hi[ax] = slice(1, None)
    inner = 0.5 * (comp[tuple(lo)] + comp[tuple(hi)])
    first = [slice(None)] * grid.dim
    second = [slice(None)] * grid.dim
    first[ax] = slice(0, 1)
    second[ax] = slice(1, 2)
    wall_lo = 1.5 * comp[tuple(first)] - 0.5 * comp[tuple(second)]
    last = [slice(None)] * grid.dim
    penult = [slice(None)] * grid.dim
    last[ax] = slice(-1, None)
    penult[ax] = slice(-2, -1)
    wall_hi = 1.5 * comp[tuple(last)] - 0.5 * comp[tuple(penult)]
    return np.concatenate([wall_lo, inner, wall_hi], axis=ax)


def divergence_arrays(
    grid: Grid, comps: Sequence["NDArray[np.float64]"]
) -> "NDArray[np.float64]":
    """Conservative divergence of a cell-centered vector field."""
    out = np.zeros(grid.shape)
    for ax in range(grid.dim):
        h = grid.spacing[ax]
        faces = _axis_face_values(grid, np.asarray(comps[ax]), ax)
        out += np.diff(faces, axis=ax) / h
    return out


def boundary_flux_value(grid: Grid, comps: Sequence["NDArray[np.float64]"]) -> float:
    """Discrete outward boundary flux consistent with ``divergence_arrays``."""
    total = 0.0
    for ax in range(grid.dim):
        h = grid.spacing[ax]
        area = grid.cell_volume / h
        faces = _axis_face_values(grid, np.asarray(comps[ax]), ax)
        first = [slice(None)] * grid.dim
        last = [slice(None)] * grid.dim
        first[ax] = slice(0, 1)
        last[ax] = slice(-1, None)
        total += float(np.sum(faces[tuple(last)]) - np.sum(faces[tuple(first)])) * area
    return total


def _first_diff(grid: Grid, values: "NDArray[np.float64]", ax: int) -> "NDArray[np.float64]":
    """Centered first difference with second-order one-sided edges."""
    h = grid.spacing[ax]
    out = np.empty_like(values)
    lo = [slice(None)] * grid.dim
    hi = [slice(None)] * grid.dim
    mid = [slice(None)] * grid.dim
    lo[ax] = slice(0, -2)
    hi[ax] = slice(2, None)
    mid[ax] = slice(1, -1)
    out[tuple(mid)] = (values[tuple(hi)] - values[tuple(lo)]) / (2.0 * h)

    def take(idx: int) -> "NDArray[np.float64]":
        sl = [slice(None)] * grid.dim
        sl[ax] = idx
        return values[tuple(sl)]

    first = [slice(None)] * grid.dim
    first[ax] = 0
    out[tuple(first)] = (-3.0 * take(0) + 4.0 * take(1) - take(2)) / (2.0 * h)
    last = [slice(None)] * grid.dim
    last[ax] = -1
    out[tuple(last)] = (3.0 * take(-1) - 4.0 * take(-2) + take(-3)) / (2.0 * h)
    return out


def _second_diff_copied(
    grid: Grid, values: "NDArray[np.float64]", ax: int
) -> "NDArray[np.float64]":
    """Centered second difference; boundary cells copy the adjacent interior value."""
    h = grid.spacing[ax]
    out = np.empty_like(values)
    lo = [slice(None)] * grid.dim
    hi = [slice(None)] * grid.dim
    mid = [slice(None)] * grid.dim
    ctr = [slice(None)] * grid.dim
    lo[ax] = slice(0, -2)
    hi[ax] = slice(2, None)
    mid[ax] = slice(1, -1)
    ctr[ax] = slice(1, -1)
    out[tuple(mid)] = (
        values[tuple(hi)] - 2.0 * values[tuple(ctr)] + values[tuple(lo)]
    ) / (h * h)
    first = [slice(None)] * grid.dim
    second = [slice(None)] * grid.dim
    first[ax] = 0
    second[ax] = 1
    out[tuple(first)] = out[tuple(second)]
    last = [slice(None)] * grid.dim
    penult = [slice(None)] * grid.dim
    last[ax] = -1
    penult[ax] = -2
    out[tuple(last)] = out[tuple(penult)]
    return out


def hessian_frobenius_arrays(
    grid: Grid, values: "NDArray[np.float64]"
) -> "NDArray[np.float64]":
    """Pointwise Frobenius norm of the second-difference Hessian."""
    if grid.dim == 1:
        return np.abs(_second_diff_copied(grid, values, 0))
    dxx = _second_diff_copied(grid, values, 0)
    dyy = _second_diff_copied(grid, values, 1)
    dxy = _first_diff(grid, _first_diff(grid, values, 0), 1)
    return np.sqrt(dxx * dxx + dyy * dyy + 2.0 * dxy * dxy)


def gradient_sq_magnitude(
    grid: Grid, values: "NDArray[np.float64]"
) -> "NDArray[np.float64]":
    """Pointwise squared gradient magnitude under the grid's conventions."""
    comps = gradient_arrays(grid, values)
    mag2 = comps[0] * comps[0]
    for c in comps[1:]:
        mag2 = mag2 + c * c
    return mag2


def lp_gradient_norm_arrays(grid: Grid, values: "NDArray[np.float64]", p: float) -> float:
    """Midpoint-rule integral of |grad phi|^p on raw arrays (p >= 2)."""
    if p < 2.0:
        raise ValueError(f"gradient integrals require p >= 2, got {p}")
    mag2 = gradient_sq_magnitude(grid, values)
    if p == 2.0:
        integrand = mag2
    else:
        integrand = mag2 ** (p / 2.0)
    return float(np.sum(integrand)) * grid.cell_volume


def weighted_dissipation_arrays(
    grid: Grid, values: "NDArray[np.float64]", p: float
) -> float:
    """Midpoint-rule integral of |grad phi|^(p-2) |D2 phi|^2 on raw arrays."""
    if p < 2.0:
        raise ValueError(f"dissipation integrals require p >= 2, got {p}")
    hess = hessian_frobenius_arrays(grid, values)
    if p == 2.0:
        integrand = hess * hess
    else:
        mag2 = gradient_sq_magnitude(grid, values)
        integrand = mag2 ** ((p - 2.0) / 2.0) * (hess * hess)
    return float(np.sum(integrand)) * grid.cell_volume


# ---------------------------------------------------------------------------
# Public field-level operations.
# ---------------------------------------------------------------------------


def gradient(phi: ScalarField) -> VectorField:
    """Discrete gradient of a scalar field.

    Centered differences in the interior; the boundary-normal component is
    zero at boundary cells (mirror-ghost convention), tangential components
    remain centered there.

    Args:
        phi: Input field.

    Returns:
        Vector field of per-axis derivative samples.
    """
    return VectorField(phi.grid, tuple(gradient_arrays(phi.grid, phi.values)))


def divergence(vec: VectorField) -> ScalarField:
    """Conservative divergence of a cell-centered vector field.

    Interior face values are arithmetic means of the adjacent cells; wall
    faces are linearly extrapolated from the two nearest cells, so the cell
    sum of the result times cell volume equals :func:`boundary_flux` exactly
    (telescoping).

    Args:
        vec: Input vector field.

    Returns:
        Scalar divergence samples.
    """
    return ScalarField(vec.grid, divergence_arrays(vec.grid, vec.components))


def boundary_flux(vec: VectorField) -> float:
    """Discrete outward boundary flux consistent with :func:`divergence`."""
    return boundary_flux_value(vec.grid, vec.components)


def laplacian_neumann(phi: ScalarField) -> ScalarField:
    """Zero-flux (Neumann) Laplacian in conservative form.

    The result sums to zero over the domain up to round-off for any input,
    and is second-order accurate at every cell for fields whose normal
    derivative vanishes at the walls.

    Args:
        phi: Input field.

    Returns:
        Laplacian samples.
    """
    return ScalarField(phi.grid, laplacian_arrays(phi.grid, phi.values))


def hessian_frobenius(phi: ScalarField) -> ScalarField:
    """Pointwise Frobenius norm of the discrete Hessian (nonnegative).

    Normal second differences are centered in the interior and copied from
    the adjacent interior cell at boundary cells; the 2D mixed derivative
    applies first differences twice (second-order one-sided at edges).
    Affine fields map to exactly zero.

    Args:
        phi: Input field.

    Returns:
        Nonnegative Hessian-norm samples.
    """
    return ScalarField(phi.grid, hessian_frobenius_arrays(phi.grid, phi.values))


def integral(phi: ScalarField) -> float:
    """Midpoint-rule integral of the field over the domain."""
    return float(np.sum(phi.values)) * phi.grid.cell_volume


def mean(phi: ScalarField) -> float:
    """Domain mean of the field."""
    return integral(phi) / float(np.prod(phi.grid.lengths))


def lp_norm(phi: ScalarField, p: float) -> float:
    """Integral of |phi|^p (midpoint rule); requires ``p >= 1``."""
    if p < 1.0:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    return float(np.sum(np.abs(phi.values) ** p)) * phi.grid.cell_volume


def lp_deviation_norm(phi: ScalarField, p: float) -> float:
    """Integral of |phi - mean(phi)|^p (midpoint rule)."""
    if p < 1.0:
        raise ValueError(f"lp_deviation_norm requires p >= 1, got {p}")
    dev = phi.values - float(np.mean(phi.values))
    return float(np.sum(np.abs(dev) ** p)) * phi.grid.cell_volume


def lp_gradient_norm(phi: ScalarField, p: float) -> float:
    """Integral of |grad phi|^p (midpoint rule).

    Positively homogeneous of degree p in the field; zero exactly when the
    discrete gradient vanishes everywhere.

    Args:
        phi: Input field.
        p: Integrability exponent, at least 2.

    Returns:
        The nonnegative integral value.

    Raises:
        ValueError: If ``p < 2``.
    """
    return lp_gradient_norm_arrays(phi.grid, phi.values, p)


def weighted_dissipation(phi: ScalarField, p: float) -> float:
    """Integral of |grad phi|^(p-2) |D2 phi|^2 (midpoint rule).

    The degenerate weight is evaluated directly — no regularization: at
    cells where the gradient vanishes and ``p > 2`` the integrand is zero;
    for ``p == 2`` the weight is identically one.

    Args:
        phi: Input field.
        p: Integrability exponent, at least 2.

    Returns:
        The nonnegative integral value.

    Raises:
        ValueError: If ``p < 2``.
    """
    return weighted_dissipation_arrays(phi.grid, phi.values, p)
