"""Publication-style figure regeneration from rabicrit CSV tables.

Three kinds: a population-dynamics panel grid, the coherence decay surface
N_e(t, g), and precision-bound curves over the coupling for several
dephasing strengths.  Rendering is a pure function of the input bytes: fixed
fonts, DPI, and color cycle, so repeated renders are pixel-identical.
Figures are regeneration aids; no numbers are asserted here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schemas import (  # noqa: E402
    COHERENCE_COLUMNS,
    METROLOGY_COLUMNS,
    PANELS_COLUMNS,
    SchemaError,
    TRAJECTORY_REQUIRED,
    load_table,
    require_columns,
)

__all__ = ["FigureSpec", "render", "KINDS"]

KINDS = ("population_grid", "coherence_surface", "cq_curves")

_RC = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.prop_cycle": plt.cycler(
        color=["#2a6fba", "#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#666666"]
    ),
}

_FILLS = ["#87b8e0", "#f0a868", "#8fd4b8", "#b5b2d8", "#f2a0c4", "#bbbbbb"]


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: what to draw, from where, to which file."""

    kind: str
    inputs: tuple          # CSV paths; for population_grid, the run directory contents
    out: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def render(spec: FigureSpec) -> Path:
    """Draw the figure and write it; returns the output path."""
    with plt.rc_context(_RC):
        if spec.kind == "population_grid":
            fig = _population_grid(spec)
        elif spec.kind == "coherence_surface":
            fig = _coherence_surface(spec)
        else:
            fig = _cq_curves(spec)
        out = Path(spec.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, metadata=_strip_metadata(out.suffix))
        plt.close(fig)
    return out


def _strip_metadata(suffix: str) -> dict:
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".png":
        return {"Software": None}
    return {}


def _annotate_empty(ax, message: str):
    ax.text(0.5, 0.5, message, ha="center", va="center",
            transform=ax.transAxes, fontsize=8, color="#aa3333")
    ax.set_xticks([])
    ax.set_yticks([])


def _find_panels_table(paths):
    for path in paths:
        if Path(path).name == "panels.csv":
            table = load_table(path)
            require_columns(table, PANELS_COLUMNS, path)
            return table, Path(path).parent
    raise SchemaError("population_grid needs a panels.csv manifest among its inputs")


def _population_grid(spec: FigureSpec):
    panels, base = _find_panels_table(spec.inputs)
    g_indices = sorted({int(x) for x in panels["g_index"]})
    s_indices = sorted({int(x) for x in panels["state_index"]})
    lookup = {
        (int(gi), int(si)): (g, state)
        for gi, si, g, state in zip(panels["g_index"], panels["state_index"],
                                    panels["g"], panels["initial_state"])
    }
    n_rows, n_cols = len(s_indices), len(g_indices)
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(3.0 * n_cols, 2.1 * n_rows),
                             sharex="col", squeeze=False)
    for col, gi in enumerate(g_indices):
        for row, si in enumerate(s_indices):
            ax = axes[row][col]
            g, state = lookup.get((gi, si), (float("nan"), "?"))
            path = base / f"traj_{gi}_{si}.csv"
            try:
                table = load_table(path)
                require_columns(table, TRAJECTORY_REQUIRED, path)
            except SchemaError as exc:
                _annotate_empty(ax, f"missing panel data\n{exc}")
                continue
            t = table["t"]
            if len(t) == 0:
                _annotate_empty(ax, "no data")
                continue
            pops = [name for name in table if name.startswith("pop_")]
            pops.sort(key=lambda name: int(name.split("_")[1]))
            for k, name in enumerate(pops):
                color = _FILLS[k % len(_FILLS)]
                ax.fill_between(t, table[name], 0.0, color=color, alpha=0.55, lw=0)
                ax.plot(t, table[name], lw=0.9, label=name.replace("pop_", "P"))
            ax.set_ylim(-0.02, 1.05)
            ax.set_title(f"g={g:g}, start {state}", fontsize=8)
            if row == n_rows - 1:
                ax.set_xlabel(r"$t\,\omega_c$")
            if col == 0:
                ax.set_ylabel("population")
    axes[0][0].legend(fontsize=6, ncol=2, loc="center right")
    fig.tight_layout()
    return fig


def _coherence_surface(spec: FigureSpec):
    (path,) = spec.inputs
    table = load_table(path)
    require_columns(table, COHERENCE_COLUMNS, path)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    if len(table["t"]) == 0:
        _annotate_empty(ax, "no data")
        return fig
    g_values = np.unique(table["g"])
    t_values = np.unique(table["t"])
    surface = np.full((len(g_values), len(t_values)), np.nan)
    g_pos = {g: i for i, g in enumerate(g_values)}
    t_pos = {t: j for j, t in enumerate(t_values)}
    for g, t, ne in zip(table["g"], table["t"], table["n_e"]):
        surface[g_pos[g], t_pos[t]] = ne
    mesh = ax.pcolormesh(t_values, g_values, surface, shading="nearest",
                         cmap="viridis", vmin=0.0)
    fig.colorbar(mesh, ax=ax, label=r"$N_e$")
    ax.set_xlabel(r"$t\,\omega_c$")
    ax.set_ylabel("g")
    ax.set_title("coherence decay across the transition", fontsize=9)
    fig.tight_layout()
    return fig


def _cq_curves(spec: FigureSpec):
    (path,) = spec.inputs
    table = load_table(path)
    require_columns(table, METROLOGY_COLUMNS, path)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    if len(table["g"]) == 0:
        _annotate_empty(ax, "no data")
        return fig
    kappas = np.unique(table["kappa_c_phi"])
    for kappa in kappas:
        mask = table["kappa_c_phi"] == kappa
        g = table["g"][mask]
        order = np.argsort(g)
        label = "no dephasing" if kappa == 0 else rf"$\kappa_c^\phi={kappa:g}$"
        ax.plot(g[order], table["cq_coupling"][mask][order], marker="o", ms=2.5,
                lw=1.1, label=label)
    if spec.style.get("logy", True):
        ax.set_yscale("log")
    ax.set_xlabel("g")
    ax.set_ylabel("coupling-estimation bound")
    ax.set_title("precision bound vs coupling", fontsize=9)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig
