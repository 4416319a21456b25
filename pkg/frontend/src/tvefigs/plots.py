"""Figure builders: decay curves, residual traces, sweep heatmaps.

Each builder takes a :class:`PlotJob`, renders one figure to PNG and SVG
next to the job's output base path, and returns a metadata dict describing
what was drawn.  Inputs are read-only; output is deterministic for fixed
inputs (the SVG hash salt is pinned).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "tvefigs"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .io import read_ledger_json, read_monitor_csv, read_sweep_csv  # noqa: E402

__all__ = ["PlotJob", "plot_decay", "plot_residuals", "plot_sweep"]

_KINDS = ("decay", "residuals", "sweep-heatmap")

#: Display floor for log-scale energy curves (exact zeros plot as this).
_DISPLAY_FLOOR = 1e-30

_ENERGY_SERIES = ("grad_v_p", "grad_u_p", "grad_u_p2", "grad_theta_p")
_RESIDUAL_SERIES = (
    "odi_residual",
    "gradu_rate_residual",
    "gradu_hi_rate_residual",
    "mass_residual",
)


@dataclass(frozen=True)
class PlotJob:
    """One figure request: input paths, figure kind, output base, scale flags.

    ``output`` is an extensionless base path; ``.png`` and ``.svg`` siblings
    are written.  For ``decay`` the ledger is optional: without it the
    envelope overlay is skipped with a warning (degraded mode).
    """

    kind: str
    output: str
    monitor: str | None = None
    ledger: str | None = None
    sweep_table: str | None = None
    log_y: bool = True
    value_field: str = "kappa_fit"

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"figure kind must be one of {_KINDS}, got {self.kind!r}")
        if self.kind in ("decay", "residuals"):
            if not self.monitor:
                raise ValueError(f"{self.kind} figures need a monitor CSV path")
        if self.kind == "sweep-heatmap" and not self.sweep_table:
            raise ValueError("sweep-heatmap figures need a sweep table path")
        for path in (self.monitor, self.ledger, self.sweep_table):
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"input file does not exist: {path}")


def _output_paths(job: PlotJob) -> tuple[Path, Path]:
    base = Path(job.output)
    base.parent.mkdir(parents=True, exist_ok=True)
    return (
        base.parent / (base.name + ".png"),
        base.parent / (base.name + ".svg"),
    )


def _save(fig, job: PlotJob) -> list[str]:
    png, svg = _output_paths(job)
    fig.savefig(png, dpi=150)
    # Suppress the SVG date stamp so identical inputs give identical bytes.
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return [str(png), str(svg)]


def _require_samples(times: np.ndarray, minimum: int = 3) -> None:
    if times.size < minimum:
        raise ValueError(
            f"insufficient samples: need at least {minimum}, found {times.size}"
        )


def _log_linear_rate(times: np.ndarray, values: np.ndarray) -> tuple[float, int] | None:
    """Post-transient decay rate of a positive series, or None if unfittable."""
    skip = times.size // 10
    t, v = times[skip:], values[skip:]
    if v.size == 0 or v[0] <= 0.0:
        return None
    usable = v > max(1e-14 * float(values[0]), 0.0)
    if np.count_nonzero(usable) < 10:
        return None
    slope = np.polyfit(t[usable], np.log(v[usable]), 1)[0]
    return -float(slope), int(np.count_nonzero(usable))


def plot_decay(job: PlotJob) -> dict:
    """Semilog decay plot: composite energy, its components, and the envelope.

    The envelope is ``c6 * eta_run^p * exp(-kappa * t)`` with ``c6`` and
    ``kappa`` taken from the ledger.  Without a ledger path the overlay is
    skipped and a warning is emitted.

    Returns:
        Metadata: output paths, overlay parameters (or None), fitted rate.
    """
    if job.kind != "decay":
        raise ValueError(f"plot_decay needs a 'decay' job, got {job.kind!r}")
    columns = read_monitor_csv(job.monitor)
    times, y = columns["t"], columns["y"]
    _require_samples(times)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(times, np.maximum(y, _DISPLAY_FLOOR), label="y(t)", linewidth=1.8)
    for name in _ENERGY_SERIES:
        ax.plot(
            times,
            np.maximum(columns[name], _DISPLAY_FLOOR),
            label=name,
            linewidth=0.9,
            alpha=0.75,
        )

    overlay = None
    if job.ledger:
        ledger = read_ledger_json(job.ledger)
        entries = ledger["entries"]
        kappa = float(entries["kappa"]["value"])
        c6 = float(entries["c6"]["value"])
        eta = float(ledger.get("eta_run") or 0.0)
        p = float(ledger["p"])
        envelope = c6 * eta**p * np.exp(-kappa * times)
        ax.plot(
            times,
            np.maximum(envelope, _DISPLAY_FLOOR),
            "k--",
            label="bound: c6*eta_run^p*exp(-kappa*t)",
            linewidth=1.4,
        )
        overlay = {"c6": c6, "kappa": kappa, "eta_run": eta, "p": p}
    else:
        warnings.warn(
            "no ledger provided; decay bound overlay skipped", stacklevel=2
        )

    fit = _log_linear_rate(times, y)
    fit_rate = None
    if fit is not None:
        fit_rate = fit[0]
        ax.annotate(
            f"fitted rate: {fit_rate:.4g}",
            xy=(0.02, 0.05),
            xycoords="axes fraction",
            fontsize=9,
        )

    if job.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("gradient energy")
    ax.set_title("energy decay")
    ax.legend(fontsize=8, loc="upper right")
    ax.grid(True, which="both", alpha=0.3)
    outputs = _save(fig, job)
    return {
        "outputs": outputs,
        "overlay": overlay,
        "fit_rate": fit_rate,
        "samples": int(times.size),
    }


def plot_residuals(job: PlotJob) -> dict:
    """Residual traces against time with a zero line and a tolerance band.

    The band spans ``[-1e-3 * y(0), 0]``: certificate residuals are allowed
    to dip below zero by at most that much.

    Returns:
        Metadata: output paths, band width, per-trace minima.
    """
    if job.kind != "residuals":
        raise ValueError(f"plot_residuals needs a 'residuals' job, got {job.kind!r}")
    columns = read_monitor_csv(job.monitor)
    times = columns["t"]
    _require_samples(times)

    band = 1e-3 * float(columns["y"][0])
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    minima = {}
    largest = 0.0
    for name in _RESIDUAL_SERIES:
        series = columns[name]
        minima[name] = float(np.min(series))
        largest = max(largest, float(np.max(np.abs(series))))
        ax.plot(times, series, label=name, linewidth=1.0)
    ax.axhline(0.0, color="black", linewidth=0.8)
    if band > 0.0:
        ax.axhspan(-band, 0.0, color="red", alpha=0.15, label="tolerance band")

    if job.log_y:
        linthresh = max(1e-18, 1e-3 * largest) if largest > 0.0 else 1e-18
        ax.set_yscale("symlog", linthresh=linthresh)
    ax.set_xlabel("t")
    ax.set_ylabel("residual")
    ax.set_title("certificate residuals")
    ax.legend(fontsize=8, loc="upper right")
    ax.grid(True, which="both", alpha=0.3)
    outputs = _save(fig, job)
    return {
        "outputs": outputs,
        "band": band,
        "minima": minima,
        "samples": int(times.size),
    }


def plot_sweep(job: PlotJob) -> dict:
    """Heatmap of one sweep result field over exactly two override axes.

    Cells from runs that did not complete (or with an empty value) are NaN
    and rendered in a distinct flat gray.

    Returns:
        Metadata: output paths, grid shape, NaN cell count.
    """
    if job.kind != "sweep-heatmap":
        raise ValueError(f"plot_sweep needs a 'sweep-heatmap' job, got {job.kind!r}")
    header, axis_columns, rows = read_sweep_csv(job.sweep_table)
    if len(axis_columns) != 2:
        raise ValueError(
            f"sweep table must have exactly two axes, found {len(axis_columns)}: "
            f"{axis_columns}"
        )
    if job.value_field not in header:
        raise ValueError(
            f"sweep table has no column {job.value_field!r} to plot"
        )

    ax0, ax1 = axis_columns

    def _axis_values(name: str) -> list[str]:
        seen: list[str] = []
        for row in rows:
            if row[name] not in seen:
                seen.append(row[name])
        try:
            return sorted(seen, key=float)
        except ValueError:
            return sorted(seen)

    values0, values1 = _axis_values(ax0), _axis_values(ax1)
    table = np.full((len(values0), len(values1)), np.nan)
    for row in rows:
        i = values0.index(row[ax0])
        j = values1.index(row[ax1])
        raw = row.get(job.value_field, "")
        if row.get("status") == "completed" and raw not in ("", "None"):
            try:
                table[i, j] = float(raw)
            except ValueError:
                pass

    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("#c8c8c8")
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    image = ax.imshow(
        np.ma.masked_invalid(table),
        origin="lower",
        aspect="auto",
        cmap=cmap,
        interpolation="nearest",
    )
    ax.set_xticks(range(len(values1)), labels=values1, rotation=45, fontsize=8)
    ax.set_yticks(range(len(values0)), labels=values0, fontsize=8)
    ax.set_xlabel(ax1)
    ax.set_ylabel(ax0)
    ax.set_title(f"{job.value_field} over the sweep")
    fig.colorbar(image, ax=ax, label=job.value_field)
    outputs = _save(fig, job)
    return {
        "outputs": outputs,
        "shape": (len(values0), len(values1)),
        "nan_cells": int(np.count_nonzero(np.isnan(table))),
    }
