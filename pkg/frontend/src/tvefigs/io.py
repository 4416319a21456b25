"""Readers for the simulator's file interfaces.

These parse the published contracts only: the monitor CSV (first line
``# monitor-csv-v1``, then a header row, then one ``%.16e`` row per sample),
the constants-ledger JSON (``"schema": "ledger-v1"``), and the sweep summary
CSV (``run_index``, the axis columns, then ``status`` and result fields).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

MONITOR_SCHEMA = "monitor-csv-v1"
LEDGER_SCHEMA = "ledger-v1"

#: Columns every monitor file must provide (order in the file may vary).
MONITOR_COLUMNS = (
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

__all__ = [
    "MONITOR_COLUMNS",
    "MONITOR_SCHEMA",
    "LEDGER_SCHEMA",
    "read_monitor_csv",
    "read_ledger_json",
    "read_sweep_csv",
]


def read_monitor_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a monitor CSV into named float columns.

    Raises:
        ValueError: Schema line mismatch, missing columns, or malformed rows.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].lstrip("# ").strip() != MONITOR_SCHEMA:
        found = lines[0] if lines else "<empty file>"
        raise ValueError(
            f"unsupported monitor schema: expected '# {MONITOR_SCHEMA}', got {found!r}"
        )
    if len(lines) < 2:
        raise ValueError("monitor file has no header row")
    header = [name.strip() for name in lines[1].split(",")]
    missing = [name for name in MONITOR_COLUMNS if name not in header]
    if missing:
        raise ValueError(f"monitor file lacks required columns: {missing}")

    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError(
                f"monitor row {lineno} has {len(parts)} fields, header has {len(header)}"
            )
        rows.append([float(part) for part in parts])
    table = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return {name: table[:, idx].copy() for idx, name in enumerate(header)}


def read_ledger_json(path: str | Path) -> dict:
    """Parse a constants-ledger JSON file.

    Raises:
        ValueError: Schema mismatch or missing entries table.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema") != LEDGER_SCHEMA:
        raise ValueError(
            f"unsupported ledger schema: expected {LEDGER_SCHEMA!r}, "
            f"got {data.get('schema')!r}"
        )
    if "entries" not in data or not isinstance(data["entries"], dict):
        raise ValueError("ledger file lacks an 'entries' table")
    return data


def read_sweep_csv(path: str | Path) -> tuple[list[str], list[str], list[dict]]:
    """Parse a sweep summary CSV.

    Returns:
        ``(header, axis_columns, rows)`` where ``axis_columns`` are the
        columns between ``run_index`` and ``status`` and each row is a
        name -> string dict.

    Raises:
        ValueError: Header malformed (no run_index/status bracketing).
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError("sweep table is empty")
    header = [name.strip() for name in lines[0].split(",")]
    if not header or header[0] != "run_index" or "status" not in header:
        raise ValueError(
            "sweep table header must start with 'run_index' and contain 'status'"
        )
    axis_columns = header[1 : header.index("status")]
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError("sweep table row width does not match its header")
        rows.append(dict(zip(header, parts)))
    return header, axis_columns, rows
