"""Figure generation for simulator run artifacts.

This package is a read-only consumer of the simulator's file interfaces:
``monitor.csv`` (schema ``monitor-csv-v1``), ``ledger.json`` (schema
``ledger-v1``) and ``sweep_summary.csv``.  It never imports the simulator;
the CSV/JSON contracts are the only coupling.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .io import read_ledger_json, read_monitor_csv, read_sweep_csv
from .plots import PlotJob, plot_decay, plot_residuals, plot_sweep

__all__ = [
    "PlotJob",
    "plot_decay",
    "plot_residuals",
    "plot_sweep",
    "read_ledger_json",
    "read_monitor_csv",
    "read_sweep_csv",
    "__version__",
]
