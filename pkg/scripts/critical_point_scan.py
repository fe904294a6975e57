#!/usr/bin/env python3
"""Locate the finite-ratio critical coupling and tabulate the gap collapse.

Writes a sweep of the two lowest excitation gaps over g and prints the
collapse-point estimate for two qubit/cavity frequency ratios.
"""
import tempfile
from pathlib import Path

from rabicrit.cli import main
from rabicrit.model import critical_point_estimate

SWEEP = """
[system]
ratio = {ratio}
g = 1.0
n_fock = 160

[run]
inner = "spectrum_gap"
m_keep = 4

[run.axes]
"system.g" = [0.95, 0.97, 0.99, 1.0, 1.005, 1.01, 1.02, 1.04, 1.06]
"""

if __name__ == "__main__":
    out_root = Path(__file__).resolve().parent.parent / "out" / "critical_point"
    for ratio in (1e3, 1e4):
        with tempfile.NamedTemporaryFile("w", suffix=".toml", delete=False) as fh:
            fh.write(SWEEP.format(ratio=ratio))
            config = fh.name
        main(["sweep", "--config", config, "--out", str(out_root / f"ratio_{ratio:g}"),
              "--jobs", "4"])
        print(f"ratio {ratio:g}: collapse point g_c = {critical_point_estimate(ratio):.5f}")
