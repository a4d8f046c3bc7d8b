"""
Coupling sweep through the batch runner
=======================================

Runs the sweep scenario in-process and prints its summary table.
"""

import tempfile
from pathlib import Path

from weakback.cli import main

with tempfile.TemporaryDirectory() as out:
    status = main(["run", "sweep", "--trials", "10", "--out", out, "-q"])
    print("exit status:", status)
    print((Path(out) / "sweep_summary.csv").read_text())
