"""Energy functionals, decay diagnostics, and monitor-row serialization.

The central object is the composite energy

    y(t) = I_p[v] + w_u_p * I_p[u] + w_theta_p * I_p[theta] + w_u_p2 * I_{p+2}[u]

where ``I_q[phi]`` denotes the integral of ``|grad phi|^q``, together with the
weighted dissipation

    h(t) = (k1 * gamma_low / 2) * J_p[v] + (w_theta_p * k2 * D / 2) * J_p[theta]

with ``J_p[phi]`` the integral of ``|grad phi|^{p-2} |Hess phi|^2``.  The
differential inequality the run is expected to respect is

    y' + 2*kappa*y + h/2 <= c5 * y^lambda,

against the explicit comparison solution ``c6 * eta^p * exp(-kappa t)``.
Residual conventions throughout: a residual is (allowed right-hand side)
minus (measured left-hand side), so nonnegative values certify the
inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .coefficients import ModelParams
from .dynamics import SimState
from .grid import lp_gradient_norm, weighted_dissipation

__all__ = [
    "MONITOR_SCHEMA",
    "MONITOR_COLUMNS",
    "EnergyWeights",
    "MonitorRow",
    "DecayFit",
    "combine_energy",
    "combine_dissipation",
    "composite_energy",
    "dissipation",
    "comparison_bound",
    "odi_residual",
    "gradient_rate_residuals",
    "decay_fit",
    "mass_residual_series",
    "cumulative_trapezoid",
    "write_monitor_csv",
    "read_monitor_csv",
]

MONITOR_SCHEMA = "monitor-csv-v1"

#: Column order of the monitor CSV (one row per sample time).
MONITOR_COLUMNS: tuple[str, ...] = (
    "t",
    "grad_v_p",
    "grad_u_p",
    "grad_u_p2",
    "grad_theta_p",
    "y",
    "h",
    "diss_v_cum",
    "diss_theta_cum",
    "theta_min",
    "theta_max",
    "mass_residual",
    "odi_residual",
    "gradu_rate_residual",
    "gradu_hi_rate_residual",
)


@dataclass(frozen=True)
class EnergyWeights:
    """Nonnegative weights of the composite energy (the leading term is 1)."""

    w_u_p: float
    w_theta_p: float
    w_u_p2: float

    def __post_init__(self) -> None:
        for name in ("w_u_p", "w_theta_p", "w_u_p2"):
            if not (getattr(self, name) >= 0.0):
                raise ValueError(f"energy weight {name} must be nonnegative")

    @classmethod
    def from_ledger(cls, ledger: object) -> "EnergyWeights":
        """Read the default weight recipe from a constants ledger."""
        return cls(
            w_u_p=float(ledger.w_u_p),
            w_theta_p=float(ledger.w_theta_p),
            w_u_p2=float(ledger.w_u_p2),
        )


@dataclass(frozen=True)
class MonitorRow:
    """One sample of every monitored quantity (CSV row, fields in order)."""

    t: float
    grad_v_p: float
    grad_u_p: float
    grad_u_p2: float
    grad_theta_p: float
    y: float
    h: float
    diss_v_cum: float
    diss_theta_cum: float
    theta_min: float
    theta_max: float
    mass_residual: float
    odi_residual: float
    gradu_rate_residual: float
    gradu_hi_rate_residual: float


def combine_energy(
    grad_v_p: float,
    grad_u_p: float,
    grad_theta_p: float,
    grad_u_p2: float,
    weights: EnergyWeights,
) -> float:
    """Composite energy from its four gradient integrals (single expression).

    Every code path that reports ``y`` uses this exact expression, so
    recomputing it from the stored columns reproduces the stored value
    bitwise.
    """
    return (
        grad_v_p
        + weights.w_u_p * grad_u_p
        + weights.w_theta_p * grad_theta_p
        + weights.w_u_p2 * grad_u_p2
    )


def combine_dissipation(
    diss_v_raw: float,
    diss_theta_raw: float,
    weights: EnergyWeights,
    ledger: object,
    params: ModelParams,
) -> float:
    """Weighted dissipation from the two raw Hessian-weighted integrals."""
    return (
        0.5 * ledger.k1 * ledger.gamma_low * diss_v_raw
        + 0.5 * weights.w_theta_p * ledger.k2 * params.D * diss_theta_raw
    )


def composite_energy(state: SimState, weights: EnergyWeights, params: ModelParams) -> float:
    """Composite energy of a state (gradient integrals at exponents p and p+2)."""
    p = params.p
    return combine_energy(
        grad_v_p=lp_gradient_norm(state.v, p),
        grad_u_p=lp_gradient_norm(state.u, p),
        grad_theta_p=lp_gradient_norm(state.theta, p),
        grad_u_p2=lp_gradient_norm(state.u, p + 2.0),
        weights=weights,
    )


def dissipation(
    state: SimState, weights: EnergyWeights, ledger: object, params: ModelParams
) -> float:
    """Weighted dissipation of a state (Hessian-weighted gradient integrals)."""
    p = params.p
    return combine_dissipation(
        diss_v_raw=weighted_dissipation(state.v, p),
        diss_theta_raw=weighted_dissipation(state.theta, p),
        weights=weights,
        ledger=ledger,
        params=params,
    )


def comparison_bound(t: float, eta: float, ledger: object, params: ModelParams) -> float:
    """Explicit exponential envelope ``c6 * eta^p * exp(-kappa t)``."""
    return float(ledger.c6) * float(eta) ** params.p * math.exp(-float(ledger.kappa) * t)


def _time_derivative(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Centered differences on the interior, one-sided at the two ends."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be equal-length 1-D arrays")
    n = times.size
    if n < 3:
        raise ValueError("time derivative needs at least 3 samples")
    out = np.empty(n)
    out[1:-1] = (values[2:] - values[:-2]) / (times[2:] - times[:-2])
    out[0] = (values[1] - values[0]) / (times[1] - times[0])
    out[-1] = (values[-1] - values[-2]) / (times[-1] - times[-2])
    return out


def odi_residual(
    times: np.ndarray,
    y: np.ndarray,
    h: np.ndarray,
    ledger: object,
    params: ModelParams,
) -> np.ndarray:
    """Differential-inequality residual ``c5*y^lam - (dy/dt + 2*kappa*y + h/2)``.

    Positive values mean the sampled trajectory decays at least as fast as
    the inequality requires.  The derivative is taken by centered differences
    on the sampled series (one-sided at the two endpoint samples, which are
    therefore softer evidence than the interior).

    Raises:
        ValueError: Fewer than 3 samples.
    """
    dy = _time_derivative(times, np.asarray(y, dtype=float))
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    c5 = float(ledger.c5)
    kappa = float(ledger.kappa)
    lam = float(ledger.lam)
    return c5 * np.power(y, lam) - (dy + 2.0 * kappa * y + 0.5 * h)


def gradient_rate_residuals(
    times: np.ndarray,
    grad_v_p: np.ndarray,
    grad_u_p: np.ndarray,
    grad_v_p2: np.ndarray,
    grad_u_p2: np.ndarray,
    params: ModelParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the two displacement-gradient decay inequalities.

    The displacement equation forces, for q in {p, p+2},

        (1/q) d/dt I_q[u] + (a/2) I_q[u] <= (2/a)^(q-1) I_q[v]

    and the residuals returned are right side minus left side, per sample
    (centered differences inside, one-sided at the ends).

    Returns:
        Tuple ``(rate_residual, hi_rate_residual)`` for exponents p and p+2.
    """
    a = params.a
    p = params.p
    d_u_p = _time_derivative(times, np.asarray(grad_u_p, dtype=float))
    d_u_p2 = _time_derivative(times, np.asarray(grad_u_p2, dtype=float))
    low = (2.0 / a) ** (p - 1.0) * np.asarray(grad_v_p, dtype=float) - (
        d_u_p / p + 0.5 * a * np.asarray(grad_u_p, dtype=float)
    )
    high = (2.0 / a) ** (p + 1.0) * np.asarray(grad_v_p2, dtype=float) - (
        d_u_p2 / (p + 2.0) + 0.5 * a * np.asarray(grad_u_p2, dtype=float)
    )
    return low, high


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential decay rate of a positive sampled series."""

    kappa_fit: float
    r_squared: float
    window: tuple[float, float]
    n_used: int


def decay_fit(times: np.ndarray, values: np.ndarray) -> DecayFit:
    """Fit ``values ~ exp(-kappa_fit * t)`` by least squares on the log.

    The first tenth of the samples is discarded as transient, and samples at
    or below ``1e-14 * values[0]`` (or nonpositive) are discarded as floor
    noise.

    Raises:
        ValueError: Fewer than 10 usable samples remain.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be equal-length 1-D arrays")
    n = times.size
    skip = n // 10
    t_win = times[skip:]
    v_win = values[skip:]
    floor = 1e-14 * values[0] if n and values[0] > 0 else 0.0
    usable = v_win > max(floor, 0.0)
    t_used = t_win[usable]
    v_used = v_win[usable]
    if t_used.size < 10:
        raise ValueError(
            f"decay fit needs at least 10 usable samples, found {t_used.size}"
        )
    log_v = np.log(v_used)
    slope, intercept = np.polyfit(t_used, log_v, 1)
    predicted = slope * t_used + intercept
    ss_res = float(np.sum((log_v - predicted) ** 2))
    ss_tot = float(np.sum((log_v - np.mean(log_v)) ** 2))
    r_squared = 1.0 if ss_tot <= 1e-30 * t_used.size else 1.0 - ss_res / ss_tot
    return DecayFit(
        kappa_fit=-float(slope),
        r_squared=r_squared,
        window=(float(t_used[0]), float(t_used[-1])),
        n_used=int(t_used.size),
    )


def cumulative_trapezoid(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral with a leading zero (same length as input)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.zeros(times.size)
    if times.size > 1:
        increments = 0.5 * (values[1:] + values[:-1]) * (times[1:] - times[:-1])
        out[1:] = np.cumsum(increments)
    return out


def mass_residual_series(
    times: np.ndarray, mass: np.ndarray, flux: np.ndarray
) -> np.ndarray:
    """Per-sample absolute defect of the mass balance.

    Compares the tracked total ``mass(t) - mass(0)`` against the trapezoid
    time integral of the boundary flux over the sample times.
    """
    mass = np.asarray(mass, dtype=float)
    flux_integral = cumulative_trapezoid(times, flux)
    return np.abs(mass - mass[0] - flux_integral)


def write_monitor_csv(path: str, columns: Mapping[str, np.ndarray]) -> None:
    """Write the monitor table (schema line, header, one row per sample)."""
    missing = [name for name in MONITOR_COLUMNS if name not in columns]
    if missing:
        raise ValueError(f"monitor columns missing: {missing}")
    series = [np.asarray(columns[name], dtype=float) for name in MONITOR_COLUMNS]
    length = series[0].size
    if any(col.size != length for col in series):
        raise ValueError("monitor columns have unequal lengths")
    lines = [f"# {MONITOR_SCHEMA}", ",".join(MONITOR_COLUMNS)]
    for i in range(length):
        lines.append(",".join(f"{col[i]:.16e}" for col in series))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_monitor_csv(path: str) -> dict[str, np.ndarray]:
    """Read a monitor table written by :func:`write_monitor_csv`.

    Raises:
        ValueError: Unrecognized schema line or header.
    """
    with open(path, "r", encoding="utf-8") as handle:
        schema_line = handle.readline().strip()
        if schema_line != f"# {MONITOR_SCHEMA}":
            raise ValueError(
                f"unrecognized monitor schema line {schema_line!r}; "
                f"expected '# {MONITOR_SCHEMA}'"
            )
        header = handle.readline().strip().split(",")
        if tuple(header) != MONITOR_COLUMNS:
            raise ValueError("monitor header does not match the v1 column list")
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    if data.size == 0:
        return {name: np.empty(0) for name in MONITOR_COLUMNS}
    if data.shape[1] != len(MONITOR_COLUMNS):
        raise ValueError("monitor row width does not match the v1 column list")
    return {name: data[:, i].copy() for i, name in enumerate(MONITOR_COLUMNS)}


def rows_to_columns(rows: Sequence[MonitorRow]) -> dict[str, np.ndarray]:
    """Transpose a sequence of rows into named column arrays."""
    return {
        name: np.array([getattr(row, name) for row in rows], dtype=float)
        for name in MONITOR_COLUMNS
    }
