"""End-to-end tests of the figure command line."""

from pathlib import Path

from tvefigs.cli import main

from conftest import SYNTHETIC_SWEEP_ONE_AXIS


class TestDecayCommand:
    def test_renders_with_ledger(self, monitor_csv, ledger_json, tmp_path, capsys):
        base = tmp_path / "fig"
        code = main(
            [
                "decay",
                str(monitor_csv),
                "--ledger",
                str(ledger_json),
                "--output",
                str(base),
            ]
        )
        assert code == 0
        assert Path(str(base) + ".png").is_file()
        assert Path(str(base) + ".svg").is_file()
        assert "wrote" in capsys.readouterr().out

    def test_renders_without_ledger_in_degraded_mode(
        self, monitor_csv, tmp_path, capsys, recwarn
    ):
        base = tmp_path / "fig"
        code = main(["decay", str(monitor_csv), "--output", str(base)])
        assert code == 0
        assert "no envelope overlay" in capsys.readouterr().out

    def test_missing_monitor_exits_two(self, tmp_path, capsys):
        code = main(
            ["decay", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "x")]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestResidualsCommand:
    def test_renders(self, monitor_csv, tmp_path):
        base = tmp_path / "res"
        assert main(["residuals", str(monitor_csv), "--output", str(base)]) == 0
        assert Path(str(base) + ".png").is_file()
        assert Path(str(base) + ".svg").is_file()

    def test_linear_flag(self, monitor_csv, tmp_path):
        base = tmp_path / "res_lin"
        code = main(
            ["residuals", str(monitor_csv), "--output", str(base), "--linear"]
        )
        assert code == 0


class TestSweepCommand:
    def test_renders_heatmap(self, sweep_csv, tmp_path, capsys):
        base = tmp_path / "heat"
        assert main(["sweep", str(sweep_csv), "--output", str(base)]) == 0
        assert Path(str(base) + ".png").is_file()
        out = capsys.readouterr().out
        assert "cell(s) without a value" in out

    def test_one_axis_table_exits_two(self, tmp_path, capsys):
        path = tmp_path / "one.csv"
        path.write_text(SYNTHETIC_SWEEP_ONE_AXIS)
        assert main(["sweep", str(path), "--output", str(tmp_path / "x")]) == 2
        assert "exactly two axes" in capsys.readouterr().err

    def test_value_field_option(self, sweep_csv, tmp_path):
        base = tmp_path / "ymax"
        code = main(
            ["sweep", str(sweep_csv), "--output", str(base), "--value", "y_max"]
        )
        assert code == 0


class TestVersionCommand:
    def test_prints_version(self, capsys):
        assert main(["version"]) == 0
        assert capsys.readouterr().out.strip() == "0.1.0"
