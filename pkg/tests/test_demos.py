import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).parent.parent / "demos"


@pytest.mark.parametrize("script", ["closed_form_rates.py", "csv_backtest.py", "kalman_filter_tracking.py"])
def test_demo_runs(script):
    r = subprocess.run([sys.executable, str(DEMOS / script)], capture_output=True, text=True, timeout=300)
    assert r.returncode == 0, r.stderr
    assert r.stdout.strip()
