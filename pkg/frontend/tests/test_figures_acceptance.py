"""Acceptance criterion for the figure package (one pass/fail line)."""

import json
from pathlib import Path

from tvefigs.plots import PlotJob, plot_decay, plot_residuals


def test_A14_figures_render_from_decay_run_artifacts(decay_run, tmp_path):
    """Decay and residual figures render from the real run; the decay overlay
    carries the ledger's envelope constants."""
    monitor = decay_run / "monitor.csv"
    ledger_path = decay_run / "ledger.json"

    decay_meta = plot_decay(
        PlotJob(
            kind="decay",
            output=str(tmp_path / "decay_fig"),
            monitor=str(monitor),
            ledger=str(ledger_path),
        )
    )
    for path in decay_meta["outputs"]:
        assert Path(path).is_file()
        assert Path(path).stat().st_size > 0

    ledger = json.loads(ledger_path.read_text())
    assert decay_meta["overlay"] is not None, "decay figure lost its envelope overlay"
    assert decay_meta["overlay"]["c6"] == ledger["entries"]["c6"]["value"]
    assert decay_meta["overlay"]["kappa"] == ledger["entries"]["kappa"]["value"]
    assert decay_meta["overlay"]["eta_run"] == ledger["eta_run"]

    residual_meta = plot_residuals(
        PlotJob(
            kind="residuals",
            output=str(tmp_path / "residual_fig"),
            monitor=str(monitor),
        )
    )
    for path in residual_meta["outputs"]:
        assert Path(path).is_file()
        assert Path(path).stat().st_size > 0
