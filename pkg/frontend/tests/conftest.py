"""Shared fixtures: synthetic run artifacts plus one real simulator run.

The real run is produced by invoking the simulator package's command line in
a subprocess — the figure package touches only the files it emits.
"""

import subprocess
import sys

import numpy as np
import pytest

from tvefigs.io import MONITOR_COLUMNS, MONITOR_SCHEMA


DECAY_RUN_TOML = """
[grid]
lengths = [1.0]
cells = [256]

[model]
a = 0.05
D = 1.0
p = 2
theta_star = 1.0

[coefficients]
viscosity = [1.0]
heating = [1.0]
stress = [[0.0, 0.01]]
coupling = [[0.0, 0.01]]

[initial]
u0_modes = [0.01]
u0t_modes = [0.01]
theta_modes = [0.01]

[time]
t_end = 200.0
dt_init = 5e-3
sample_interval = 0.05

[scheme]
order = 2

[run]
seed = 7
"""


def synthetic_monitor_text(
    n: int = 60, dt: float = 0.1, y0: float = 1e-3, rate: float = 0.5, zero: bool = False
) -> str:
    """A well-formed monitor CSV with exponentially decaying energy columns."""
    t = np.arange(n) * dt
    if zero:
        y = np.zeros(n)
    else:
        y = y0 * np.exp(-rate * t)
    parts = {
        "t": t,
        "grad_v_p": 0.4 * y,
        "grad_u_p": 0.3 * y,
        "grad_u_p2": 0.1 * y,
        "grad_theta_p": 0.2 * y,
        "y": y,
        "h": 0.5 * rate * y,
        "diss_v_cum": 0.6 * y0 * (1.0 - np.exp(-rate * t)),
        "diss_theta_cum": 0.4 * y0 * (1.0 - np.exp(-rate * t)),
        "theta_min": 1.0 - 0.01 * np.exp(-t),
        "theta_max": 1.0 + 0.01 * np.exp(-t),
        "mass_residual": 1e-9 * np.sin(t),
        "odi_residual": 1e-6 * np.exp(-t),
        "gradu_rate_residual": 1e-7 * np.cos(t) ** 2,
        "gradu_hi_rate_residual": 1e-8 * np.ones(n),
    }
    lines = [f"# {MONITOR_SCHEMA}", ",".join(MONITOR_COLUMNS)]
    for i in range(n):
        lines.append(",".join(f"{parts[name][i]:.16e}" for name in MONITOR_COLUMNS))
    return "\n".join(lines) + "\n"


SYNTHETIC_LEDGER = (
    '{\n  "schema": "ledger-v1",\n  "p": 2.0,\n  "n": 1,\n'
    '  "eta_run": 0.0316227766016838,\n  "A_feasible": true,\n'
    '  "entries": {\n'
    '    "kappa": {"value": 0.5, "provenance": "exact-formula"},\n'
    '    "c6": {"value": 2.0, "provenance": "exact-formula"}\n'
    "  }\n}\n"
)

SYNTHETIC_SWEEP = (
    "run_index,model.a,initial.scale,status,kappa_fit,r_squared,y0,y_max,"
    "watchdog_tripped,output_dir\n"
    "0,0.05,1.0,completed,0.101,0.999,0.001,0.001,false,cell_000\n"
    "1,0.05,2.0,completed,0.099,0.998,0.004,0.004,false,cell_001\n"
    "2,0.05,4.0,completed,0.095,0.991,0.016,0.016,false,cell_002\n"
    "3,0.1,1.0,completed,0.201,0.999,0.001,0.001,false,cell_003\n"
    "4,0.1,2.0,error,,,,,,cell_004\n"
    "5,0.1,4.0,blowup_suspected,,,0.016,0.21,true,cell_005\n"
)

SYNTHETIC_SWEEP_ONE_AXIS = (
    "run_index,model.a,status,kappa_fit,r_squared,y0,y_max,"
    "watchdog_tripped,output_dir\n"
    "0,0.05,completed,0.101,0.999,0.001,0.001,false,cell_000\n"
)


@pytest.fixture
def monitor_csv(tmp_path):
    path = tmp_path / "monitor.csv"
    path.write_text(synthetic_monitor_text())
    return path


@pytest.fixture
def ledger_json(tmp_path):
    path = tmp_path / "ledger.json"
    path.write_text(SYNTHETIC_LEDGER)
    return path


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "sweep_summary.csv"
    path.write_text(SYNTHETIC_SWEEP)
    return path


@pytest.fixture(scope="session")
def decay_run(tmp_path_factory):
    """Artifacts of the real small-data decay run, via the simulator CLI."""
    base = tmp_path_factory.mktemp("decay_run")
    config = base / "run.toml"
    config.write_text(DECAY_RUN_TOML)
    out = base / "out"
    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "tvelab.cli",
            "run",
            str(config),
            "--output",
            str(out),
        ],
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert result.returncode == 0, f"simulator run failed:\n{result.stderr}"
    return out
