"""Command-line interface: one subcommand per figure kind.

* ``decay MONITOR --output BASE [--ledger LEDGER] [--linear]``
* ``residuals MONITOR --output BASE [--linear]``
* ``sweep TABLE --output BASE [--value FIELD]``

Each writes ``BASE.png`` and ``BASE.svg``.  Exit codes: 0 on success, 2 on
usage, schema, or file errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from .plots import PlotJob, plot_decay, plot_residuals, plot_sweep

__all__ = ["main", "build_parser"]


def _cmd_decay(args: argparse.Namespace) -> int:
    job = PlotJob(
        kind="decay",
        output=args.output,
        monitor=args.monitor,
        ledger=args.ledger,
        log_y=not args.linear,
    )
    meta = plot_decay(job)
    for path in meta["outputs"]:
        print(f"wrote {path}")
    if meta["overlay"] is None:
        print("note: no envelope overlay (ledger not provided)")
    return 0


def _cmd_residuals(args: argparse.Namespace) -> int:
    job = PlotJob(
        kind="residuals",
        output=args.output,
        monitor=args.monitor,
        log_y=not args.linear,
    )
    meta = plot_residuals(job)
    for path in meta["outputs"]:
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    job = PlotJob(
        kind="sweep-heatmap",
        output=args.output,
        sweep_table=args.table,
        value_field=args.value,
    )
    meta = plot_sweep(job)
    for path in meta["outputs"]:
        print(f"wrote {path}")
    if meta["nan_cells"]:
        print(f"note: {meta['nan_cells']} cell(s) without a value (gray)")
    return 0


def _cmd_version(args: argparse.Namespace) -> int:
    print(__version__)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvefigs",
        description="Render figures from simulator run artifacts (CSV/JSON).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_decay = sub.add_parser("decay", help="semilog energy decay with envelope")
    p_decay.add_argument("monitor", help="monitor.csv path")
    p_decay.add_argument("--output", required=True, help="output base path")
    p_decay.add_argument("--ledger", help="ledger.json path (for the envelope)")
    p_decay.add_argument(
        "--linear", action="store_true", help="linear instead of log y-axis"
    )
    p_decay.set_defaults(handler=_cmd_decay)

    p_res = sub.add_parser("residuals", help="certificate residual traces")
    p_res.add_argument("monitor", help="monitor.csv path")
    p_res.add_argument("--output", required=True, help="output base path")
    p_res.add_argument(
        "--linear", action="store_true", help="linear instead of symlog y-axis"
    )
    p_res.set_defaults(handler=_cmd_residuals)

    p_sweep = sub.add_parser("sweep", help="sweep heatmap over two axes")
    p_sweep.add_argument("table", help="sweep_summary.csv path")
    p_sweep.add_argument("--output", required=True, help="output base path")
    p_sweep.add_argument(
        "--value", default="kappa_fit", help="result column to map (default kappa_fit)"
    )
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_version = sub.add_parser("version", help="print the package version")
    p_version.set_defaults(handler=_cmd_version)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
