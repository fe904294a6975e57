"""CSV loading and schema validation for rabicrit outputs.

Every reader validates the header before touching the data and names the
offending column on mismatch.  Tables are returned as dicts of float arrays
keyed by column name (string columns stay strings).
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["SchemaError", "load_table", "require_columns",
           "TRAJECTORY_REQUIRED", "PANELS_COLUMNS", "COHERENCE_COLUMNS",
           "METROLOGY_COLUMNS"]

TRAJECTORY_REQUIRED = ("t", "pop_0", "trace_drift", "min_eig")
PANELS_COLUMNS = ("g_index", "state_index", "g", "initial_state", "generator")
COHERENCE_COLUMNS = ("g", "t", "n_e")
METROLOGY_COLUMNS = ("g", "kappa_c_phi", "beta", "delta_n_sq", "zeta_star",
                     "cq", "cq_coupling", "fq_exact", "delta_phi", "nu")


class SchemaError(Exception):
    """A CSV does not match the expected rabicrit schema."""


def load_table(path) -> dict:
    """Read one rabicrit CSV (units comment + header + rows).

    Returns {column: list}; numeric columns are converted to float arrays,
    everything else stays a list of strings.  Header-only files produce
    empty columns.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    rows = [r for r in rows if not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: no header row")
    header = rows[0]
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate column names")
    columns = {name: [] for name in header}
    for row in rows[1:]:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row width {len(row)} != header width {len(header)}")
        for name, value in zip(header, row):
            columns[name].append(value)
    out = {}
    for name, values in columns.items():
        try:
            out[name] = np.array([float(v) for v in values], dtype=float)
        except ValueError:
            out[name] = values
    return out


def require_columns(table: dict, required, path) -> None:
    """Raise SchemaError naming the first missing column."""
    for name in required:
        if name not in table:
            raise SchemaError(f"{path}: missing required column {name!r}")
