import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


@pytest.mark.parametrize(
    "name, args",
    [
        ("gnl_sweep.py", ["--dims", "2", "3", "--trials", "5"]),
        ("oracle_comparison.py", ["--instances", "1"]),
        ("descent_curves.py", ["--samples", "11"]),
    ],
)
def test_script_runs(name, args, tmp_path):
    if name == "descent_curves.py":
        args = args + ["--outdir", str(tmp_path)]
    proc = subprocess.run(
        [sys.executable, str(SCRIPTS / name), *args], capture_output=True, text=True, cwd=tmp_path
    )
    assert proc.returncode == 0, proc.stderr
