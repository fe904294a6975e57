"""Task execution and deterministic result serialization."""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_to_toml, parse_state_spec
from .dissipators import (
    default_baths,
    dephasing_generator_np,
    dephasing_generator_sp,
    dressed_jump_operators,
    generalized_liouvillian,
    rwa_lindblad_np,
    rwa_lindblad_sp,
)
from .dynamics import IntegratorConfig, evolve, fit_decay_rate
from .errors import FitError, RabicritError
from .metrology import (
    ProbeState,
    beta_from_dynamics,
    cq_min,
    dephased_probe,
    number_variance,
    optimal_zeta,
    phase_bound,
    qfi_exact,
)
from .model import SystemParams, labeled_spectrum, phase_quantities

__all__ = ["TableData", "ResultBundle", "run_subcommand", "write_bundle"]

UNITS_NOTE = "# units: omega_c=1"


@dataclass(frozen=True)
class TableData:
    name: str
    columns: tuple
    rows: tuple   # tuple of row tuples, plain Python scalars


@dataclass
class ResultBundle:
    metadata: dict
    tables: dict
    wall_time_s: float = field(default=0.0, compare=False)   # diagnostics only, never serialized


def _state_vector(spec_text: str, spectrum) -> np.ndarray:
    kind = parse_state_spec(spec_text)
    m = spectrum.n_kept
    vec = np.zeros(m, dtype=complex)
    if kind[0] == "eigen":
        if kind[1] >= m:
            raise RabicritError(f"state {spec_text!r} outside the retained basis (m_keep={m})")
        vec[kind[1]] = 1.0
    elif kind[0] == "eigen_sp":
        target = ("SP", kind[1], kind[2])
        try:
            vec[spectrum.labels.index(target)] = 1.0
        except ValueError:
            raise RabicritError(f"state {spec_text!r}: no retained state labeled {target}") from None
    else:
        for coeff, idx in kind[1]:
            if idx >= m:
                raise RabicritError(f"state {spec_text!r} outside the retained basis (m_keep={m})")
            vec[idx] += coeff
        vec /= np.linalg.norm(vec)
    return vec


def _build_generator(kind: str, params: SystemParams, spectrum):
    phase = phase_quantities(params).phase
    m = spectrum.n_kept

    def rwa():
        return rwa_lindblad_np(params, m) if phase == "NP" else rwa_lindblad_sp(params, m)

    def dephasing():
        return (dephasing_generator_np(params, m) if phase == "NP"
                else dephasing_generator_sp(params, m))

    def full():
        jumps = dressed_jump_operators(spectrum)
        return generalized_liouvillian(jumps, default_baths(params))

    if kind == "full_nonsecular":
        return full()
    if kind == "rwa":
        return rwa()
    if kind == "dephasing":
        return dephasing()
    if kind == "rwa+dephasing":
        gen = rwa() + dephasing()
        return gen
    if kind == "full_nonsecular+dephasing":
        full_gen = full()
        deph = dephasing()
        deph.basis_id = full_gen.basis_id   # same retained eigenbasis by construction
        return full_gen + deph
    raise RabicritError(f"unknown generator kind {kind!r}")


def _spectrum_task(config: RunConfig) -> dict:
    spec = labeled_spectrum(config.system, m_keep=config.run["m_keep"],
                            method=config.run["spectrum_method"])
    rows = []
    for k in range(spec.n_kept):
        label = spec.labels[k]
        branch = label[2] if len(label) == 3 else 0
        gap = spec.energies[k + 1] - spec.energies[k] if k + 1 < spec.n_kept else float("nan")
        rows.append((k, float(spec.energies[k]), float(gap), label[0], int(label[1]),
                     int(branch), float(spec.fidelities[k]), int(k in spec.flagged)))
    columns = ("index", "energy", "gap_to_next", "phase", "ladder_n",
               "branch", "ansatz_fidelity", "flagged")
    return {"spectrum": TableData("spectrum", columns, tuple(rows))}


def _trajectory_table(name, traj, pairs) -> TableData:
    columns = (["t"] + [f"pop_{k}" for k in range(traj.dim)]
               + [f"coh_{i}_{j}" for (i, j) in pairs] + ["trace_drift", "min_eig"])
    rows = []
    for idx, t in enumerate(traj.times):
        row = [float(t)] + [float(x) for x in traj.populations[idx]]
        row += [float(traj.coherences[(i, j)][idx]) for (i, j) in pairs]
        row += [float(traj.trace_drift[idx]), float(traj.min_eig[idx])]
        rows.append(tuple(row))
    return TableData(name, tuple(columns), tuple(rows))


def _dynamics_task(config: RunConfig) -> dict:
    run = config.run
    g_values = list(run["g_values"]) or [config.system.g]
    states = list(run["initial_states"])
    pairs = [tuple(p) for p in run["coherence_pairs"]]
    tables = {}
    panel_rows = []
    for i, g in enumerate(g_values):
        params = replace(config.system, g=float(g))
        spectrum = labeled_spectrum(params, m_keep=run["m_keep"], method=run["spectrum_method"])
        generator = _build_generator(run["generator"], params, spectrum)
        h = np.diag(spectrum.energies).astype(complex) if run["coherent"] else None
        for j, state_text in enumerate(states):
            vec = _state_vector(str(state_text), spectrum)
            rho0 = np.outer(vec, vec.conj())
            cfg = IntegratorConfig(t_end=float(run["t_end"]), dt=float(run["dt"]),
                                   n_record=int(run["n_record"]), method=run["integrator"])
            traj = evolve(h, generator, rho0, cfg, coherence_pairs=tuple(pairs))
            name = f"traj_{i}_{j}"
            tables[name] = _trajectory_table(name, traj, pairs)
            panel_rows.append((i, j, float(g), str(state_text), run["generator"]))
    tables["panels"] = TableData(
        "panels", ("g_index", "state_index", "g", "initial_state", "generator"),
        tuple(panel_rows),
    )
    return tables


def _dephasing_rate_pair(params: SystemParams, m_keep: int, pair) -> tuple:
    """(fitted, analytic) coherence decay rate for one coupling value."""
    q = phase_quantities(params)
    i, j = pair
    if q.phase == "NP":
        gen = dephasing_generator_np(params, m_keep)
        ladder_sep = j - i
    else:
        gen = dephasing_generator_sp(params, m_keep)
        ladder_sep = (j // 2) - (i // 2)
    analytic = params.kappa_c_phi / 4 * np.cosh(2 * q.squeeze) ** 2 * ladder_sep**2
    m = gen.dim
    rho0 = np.zeros((m, m), dtype=complex)
    rho0[i, i] = rho0[j, j] = 0.5
    rho0[i, j] = rho0[j, i] = 0.5
    t_fit = 3.0 / analytic
    cfg = IntegratorConfig(t_end=t_fit, dt=t_fit / 400, n_record=41)
    traj = evolve(None, gen, rho0, cfg, coherence_pairs=(tuple(pair),))
    try:
        fitted, _ = fit_decay_rate(traj.times, traj.coherences[tuple(pair)])
    except FitError:
        fitted = float("nan")
    return float(fitted), float(analytic)


def _dephasing_task(config: RunConfig) -> dict:
    run = config.run
    pair = tuple(int(x) for x in run["pair"])
    scan_rows, rate_rows = [], []
    for g in run["g_grid"]:
        params = replace(config.system, g=float(g))
        q = phase_quantities(params)
        gen = (dephasing_generator_np(params, run["m_keep"]) if q.phase == "NP"
               else dephasing_generator_sp(params, run["m_keep"]))
        m = gen.dim
        rho0 = np.zeros((m, m), dtype=complex)
        i, j = pair
        rho0[i, i] = rho0[j, j] = 0.5
        rho0[i, j] = rho0[j, i] = 0.5
        cfg = IntegratorConfig(t_end=float(run["t_end"]), dt=float(run["dt"]),
                               n_record=int(run["n_record"]))
        traj = evolve(None, gen, rho0, cfg, coherence_pairs=(pair,))
        for t, value in zip(traj.times, traj.coherences[pair]):
            scan_rows.append((float(g), float(t), float(value)))
        fitted, analytic = _dephasing_rate_pair(params, run["m_keep"], pair)
        rate_rows.append((float(g), fitted, analytic))
    return {
        "coherence_scan": TableData("coherence_scan", ("g", "t", "n_e"), tuple(scan_rows)),
        "dephasing_rates": TableData(
            "dephasing_rates", ("g", "fitted_rate", "analytic_rate"), tuple(rate_rows)
        ),
    }


def _metrology_rows(system: SystemParams, g, kappa, probe_text, t, nu, phi):
    params = replace(system, g=float(g), kappa_c_phi=float(kappa))
    q = phase_quantities(params)
    kind = parse_state_spec(probe_text)
    if kind[0] == "superpose":
        probe = ProbeState.superposition(*kind[1])
    elif kind[0] == "eigen":
        probe = ProbeState.superposition((1.0, kind[1]))
    else:
        raise RabicritError("superradiant probes are unsupported")
    beta = beta_from_dynamics(params.kappa_c_phi, q.squeeze, t).beta
    dn2 = number_variance(probe)
    cq = cq_min(dn2, beta)
    fq = qfi_exact(dephased_probe(probe, phi, beta))
    # sensitivity of the accumulated phase omega_c*sqrt(1-g^2)*t to the coupling
    dphi_dg = params.omega_c * t * float(g) / np.sqrt(1 - float(g) ** 2)
    return (float(g), float(kappa), float(beta), float(dn2),
            float(optimal_zeta(dn2, beta)), float(cq), float(cq * dphi_dg**2),
            float(fq), float(phase_bound(nu, dn2, beta)), int(nu))


_METROLOGY_COLUMNS = ("g", "kappa_c_phi", "beta", "delta_n_sq", "zeta_star",
                      "cq", "cq_coupling", "fq_exact", "delta_phi", "nu")


def _metrology_task(config: RunConfig) -> dict:
    run = config.run
    rows = []
    for kappa in run["kappa_grid"]:
        for g in run["g_grid"]:
            rows.append(_metrology_rows(config.system, g, kappa, run["probe"],
                                        float(run["time"]), int(run["nu"]), float(run["phi"])))
    return {"metrology": TableData("metrology", _METROLOGY_COLUMNS, tuple(rows))}


def _sweep_point(config: RunConfig, assignment: dict) -> tuple:
    system = config.system
    for path, value in assignment.items():
        system = replace(system, **{path.split(".", 1)[1]: float(value)})
    run = config.run
    if run["inner"] == "spectrum_gap":
        spec = labeled_spectrum(system, m_keep=run["m_keep"])
        result = (float(spec.energies[1] - spec.energies[0]),
                  float(spec.energies[2] - spec.energies[1]))
    elif run["inner"] == "dephasing_rate":
        result = _dephasing_rate_pair(system, run["m_keep"], (0, 2))
    else:   # metrology_point
        result = _metrology_rows(system, system.g, system.kappa_c_phi, run["probe"],
                                 float(run["time"]), int(run["nu"]), np.pi / 4)[2:]
    return tuple(float(v) for v in assignment.values()) + tuple(result)


_SWEEP_RESULT_COLUMNS = {
    "spectrum_gap": ("gap_01", "gap_12"),
    "dephasing_rate": ("fitted_rate", "analytic_rate"),
    "metrology_point": _METROLOGY_COLUMNS[2:],
}


def _sweep_task(config: RunConfig, jobs: int = 1) -> dict:
    run = config.run
    axes = {k: list(v) for k, v in sorted(run["axes"].items())}
    points = [{}]
    for path, values in axes.items():
        points = [dict(p, **{path: v}) for p in points for v in values]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: _sweep_point(config, p), points))
    else:
        rows = [_sweep_point(config, p) for p in points]
    columns = tuple(axes) + _SWEEP_RESULT_COLUMNS[run["inner"]]
    return {"sweep": TableData("sweep", columns, tuple(rows))}


def run_subcommand(task: str, config: RunConfig, jobs: int = 1) -> ResultBundle:
    """Execute one task and collect its tables plus the config echo."""
    start = time.perf_counter()
    if task == "spectrum":
        tables = _spectrum_task(config)
    elif task == "dynamics":
        tables = _dynamics_task(config)
    elif task == "dephasing":
        tables = _dephasing_task(config)
    elif task == "metrology":
        tables = _metrology_task(config)
    elif task == "sweep":
        tables = _sweep_task(config, jobs=jobs)
    else:
        raise RabicritError(f"unknown task {task!r}")
    metadata = {
        "artifact": "rabicrit",
        "version": __version__,
        "units": "omega_c=1",
        "config": config.to_document(),
    }
    return ResultBundle(metadata=metadata, tables=tables,
                        wall_time_s=time.perf_counter() - start)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_bundle(bundle: ResultBundle, out_dir, fmt: str = "csv") -> list:
    """Write tables to disk; identical bundles produce identical bytes.

    CSV: one file per table with a units comment and full round-trip float
    precision, plus metadata.json.  JSON: a single bundle.json document.
    Wall time stays out of both.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        for name in sorted(bundle.tables):
            table = bundle.tables[name]
            path = out / f"{name}.csv"
            with open(path, "w", newline="\n") as fh:
                fh.write(UNITS_NOTE + "\n")
                fh.write(",".join(table.columns) + "\n")
                for row in table.rows:
                    fh.write(",".join(_format_cell(v) for v in row) + "\n")
            written.append(path)
        meta_path = out / "metadata.json"
        with open(meta_path, "w", newline="\n") as fh:
            json.dump(bundle.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(meta_path)
    elif fmt == "json":
        doc = {
            "metadata": bundle.metadata,
            "tables": {
                name: {"columns": list(t.columns), "rows": [list(r) for r in t.rows]}
                for name, t in sorted(bundle.tables.items())
            },
        }
        path = out / "bundle.json"
        with open(path, "w", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    else:
        raise RabicritError(f"unknown output format {fmt!r}")
    return written


def echo_config_toml(bundle: ResultBundle) -> str:
    """Round-trippable TOML of the resolved config inside a bundle."""
    doc = dict(bundle.metadata["config"])
    return config_to_toml(doc)
