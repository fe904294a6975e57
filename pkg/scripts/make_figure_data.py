#!/usr/bin/env python3
"""Generate the CSV datasets behind the three summary figures.

Runs the dynamics grid, the dephasing scan, and the metrology curves through
the rabicrit CLI into out/figdata/.  Rerunning reproduces identical bytes.
"""
import sys
from pathlib import Path

from rabicrit.cli import main

HERE = Path(__file__).resolve().parent.parent
JOBS = [
    ("dynamics", "fig_population_grid.toml"),
    ("dephasing", "fig_coherence_scan.toml"),
    ("metrology", "fig_cq_curves.toml"),
]

if __name__ == "__main__":
    for task, config in JOBS:
        code = main([task, "--config", str(HERE / "configs" / config)])
        if code != 0:
            sys.exit(code)
    print("figure data under", HERE / "out" / "figdata")
