import runpy
from pathlib import Path

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def test_widths_demo_runs(capsys):
    runpy.run_path(str(DEMOS / "01_widths_and_trajectories.py"), run_name="__main__")
    assert "ordering preserved: True" in capsys.readouterr().out
