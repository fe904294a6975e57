"""Strict run-configuration parsing and deterministic serialization.

Configs are TOML documents with three sections: [system] (model constants),
[run] (task-specific controls), [output].  Unknown keys are rejected, every
problem is collected (not just the first), and all numbers are dimensionless
with omega_c = 1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:     # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .model import SystemParams

__all__ = ["RunConfig", "OutputConfig", "parse_config", "config_to_toml", "parse_state_spec"]

TASKS = ("spectrum", "dynamics", "dephasing", "metrology", "sweep")

_REAL = (int, float)


def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


def _fraction_exclusive(x):
    return 0 < x < 1


# key -> (types, default, validator or None, description of the constraint)
_SYSTEM_SCHEMA = {
    "ratio": (_REAL, None, _positive, "must be > 0"),
    "g": (_REAL, None, _non_negative, "must be >= 0"),
    "omega_c": (_REAL, 1.0, _positive, "must be > 0"),
    "n_fock": ((int,), 100, lambda x: x >= 2, "must be >= 2"),
    "gamma1": (_REAL, 0.0, _non_negative, "must be >= 0"),
    "gamma2": (_REAL, 0.0, _non_negative, "must be >= 0"),
    "kappa_c_phi": (_REAL, 0.0, _non_negative, "must be >= 0"),
    "kappa_q_phi": (_REAL, 0.0, _non_negative, "must be >= 0"),
}

_OUTPUT_SCHEMA = {
    "directory": ((str,), "out", None, ""),
    "format": ((str,), "csv", lambda x: x in ("csv", "json"), "must be 'csv' or 'json'"),
}

_COMMON_RUN = {
    "m_keep": ((int,), 10, _positive, "must be >= 1"),
    "spectrum_method": ((str,), "auto",
                        lambda x: x in ("auto", "exact", "effective"),
                        "must be auto|exact|effective"),
}

_RUN_SCHEMAS = {
    "spectrum": {**_COMMON_RUN},
    "dynamics": {
        **_COMMON_RUN,
        "generator": ((str,), "full_nonsecular",
                      lambda x: x in ("full_nonsecular", "rwa", "dephasing",
                                      "rwa+dephasing", "full_nonsecular+dephasing"),
                      "unknown generator kind"),
        "g_values": ((list,), [], None, ""),
        "initial_states": ((list,), ["eigenstate(1)"], None, ""),
        "t_end": (_REAL, None, _positive, "must be > 0"),
        "dt": (_REAL, 0.02, _positive, "must be > 0"),
        "n_record": ((int,), 121, lambda x: x >= 2, "must be >= 2"),
        "integrator": ((str,), "fixed_rk4",
                       lambda x: x in ("fixed_rk4", "adaptive_rkf45"), "unknown integrator"),
        "coherent": ((bool,), True, None, ""),
        "coherence_pairs": ((list,), [], None, ""),
    },
    "dephasing": {
        **_COMMON_RUN,
        "g_grid": ((list,), [0.5, 0.7, 0.9, 0.95], None, ""),
        "pair": ((list,), [0, 2], None, ""),
        "t_end": (_REAL, 30.0, _positive, "must be > 0"),
        "dt": (_REAL, 0.02, _positive, "must be > 0"),
        "n_record": ((int,), 61, lambda x: x >= 2, "must be >= 2"),
    },
    "metrology": {
        "g_grid": ((list,), [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99], None, ""),
        "kappa_grid": ((list,), [0.0, 0.05], None, ""),
        "time": (_REAL, 5.0, _positive, "must be > 0"),
        "probe": ((str,), "superpose(1, 0; 1, 2)", None, ""),
        "nu": ((int,), 1, _positive, "must be >= 1"),
        "phi": (_REAL, 0.7853981633974483, None, ""),
    },
    "sweep": {
        "inner": ((str,), None,
                  lambda x: x in ("spectrum_gap", "dephasing_rate", "metrology_point"),
                  "must be spectrum_gap|dephasing_rate|metrology_point"),
        "axes": ((dict,), None, None, ""),
        "m_keep": ((int,), 10, _positive, "must be >= 1"),
        "time": (_REAL, 5.0, _positive, "must be > 0"),
        "probe": ((str,), "superpose(1, 0; 1, 2)", None, ""),
        "nu": ((int,), 1, _positive, "must be >= 1"),
    },
}

_SWEEP_AXES = {
    "system.g", "system.gamma1", "system.gamma2",
    "system.kappa_c_phi", "system.kappa_q_phi", "system.ratio",
}


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    task: str
    system: SystemParams
    run: dict
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_document(self) -> dict:
        """Resolved configuration as a plain dict (the metadata echo)."""
        system = {k: getattr(self.system, k) for k in _SYSTEM_SCHEMA}
        return {
            "task": self.task,
            "system": system,
            "run": dict(sorted(self.run.items())),
            "output": {"directory": self.output.directory, "format": self.output.format},
        }


def _line_of(text: str, key: str) -> Optional[int]:
    for i, line in enumerate(text.splitlines(), start=1):
        if re.match(rf"\s*{re.escape(key)}\s*=", line):
            return i
    return None


def _check_section(doc, text, section, schema, problems):
    data = doc.get(section, {})
    if not isinstance(data, dict):
        problems.append(f"{section}: expected a table")
        return {}
    out = {}
    for key, value in data.items():
        if key not in schema:
            loc = _line_of(text, key)
            suffix = f" (line {loc})" if loc else ""
            problems.append(f"{section}.{key}: unknown key{suffix}")
            continue
        types, _, validator, constraint = schema[key]
        if isinstance(value, bool) and bool not in types:
            problems.append(f"{section}.{key}: expected {types}, got a boolean")
            continue
        if not isinstance(value, types):
            loc = _line_of(text, key)
            suffix = f" (line {loc})" if loc else ""
            problems.append(
                f"{section}.{key}: expected {'/'.join(t.__name__ for t in types)}, "
                f"got {type(value).__name__}{suffix}"
            )
            continue
        if validator is not None and not validator(value):
            loc = _line_of(text, key)
            suffix = f" (line {loc})" if loc else ""
            problems.append(f"{section}.{key}: {constraint}{suffix}")
            continue
        out[key] = value
    for key, (_, default, _, _) in schema.items():
        if key in out or key in data:
            continue   # present and valid, or already reported
        if default is None:
            problems.append(f"{section}.{key}: required key missing")
        else:
            out[key] = default
    return out


_STATE_EIGEN = re.compile(r"^eigenstate\(\s*(\d+)\s*\)$")
_STATE_EIGEN_SP = re.compile(r"^eigenstate_sp\(\s*(\d+)\s*,\s*([+-])\s*\)$")
_STATE_SUPERPOSE = re.compile(r"^superpose\((.+)\)$")


def parse_state_spec(spec: str):
    """Initial-state mini-language.

    eigenstate(n) is the n-th retained state in energy order;
    eigenstate_sp(n, +|-) addresses a superradiant branch member;
    superpose(c, n; c, n; ...) mixes retained states with real weights.
    Returns ("eigen", n), ("eigen_sp", n, branch) or ("superpose", [(c, n), ...]).
    """
    spec = spec.strip()
    m = _STATE_EIGEN.match(spec)
    if m:
        return ("eigen", int(m.group(1)))
    m = _STATE_EIGEN_SP.match(spec)
    if m:
        return ("eigen_sp", int(m.group(1)), +1 if m.group(2) == "+" else -1)
    m = _STATE_SUPERPOSE.match(spec)
    if m:
        terms = []
        for chunk in m.group(1).split(";"):
            parts = chunk.split(",")
            if len(parts) != 2:
                raise ValueError(f"bad superpose term {chunk!r}")
            terms.append((float(parts[0]), int(parts[1])))
        if not terms:
            raise ValueError("superpose needs at least one term")
        return ("superpose", terms)
    raise ValueError(f"unrecognized state spec {spec!r}")


def _validate_task_extras(task, run, problems):
    if task == "dynamics":
        for i, spec in enumerate(run.get("initial_states", []) or []):
            try:
                parse_state_spec(str(spec))
            except ValueError as exc:
                problems.append(f"run.initial_states[{i}]: {exc}")
        for i, pair in enumerate(run.get("coherence_pairs", []) or []):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(x, int) and x >= 0 for x in pair)):
                problems.append(f"run.coherence_pairs[{i}]: expected [i, j] with ints >= 0")
    if task in ("dephasing", "metrology"):
        grid = run.get("g_grid")
        if grid is not None:
            for i, g in enumerate(grid):
                if not isinstance(g, _REAL) or g <= 0:
                    problems.append(f"run.g_grid[{i}]: must be a positive number")
                elif task == "metrology" and g >= 1:
                    problems.append(
                        f"run.g_grid[{i}]: metrology bounds are defined in the normal phase (g < 1)"
                    )
    if task == "metrology":
        for i, k in enumerate(run.get("kappa_grid", []) or []):
            if not isinstance(k, _REAL) or k < 0:
                problems.append(f"run.kappa_grid[{i}]: must be a number >= 0")
        if "probe" in run:
            try:
                kind = parse_state_spec(run["probe"])
                if kind[0] == "eigen_sp":
                    problems.append("run.probe: superradiant probes are unsupported")
            except ValueError as exc:
                problems.append(f"run.probe: {exc}")
    if task == "sweep":
        axes = run.get("axes")
        if isinstance(axes, dict):
            if not axes:
                problems.append("run.axes: declare at least one sweep axis")
            for path, values in axes.items():
                if path not in _SWEEP_AXES:
                    problems.append(
                        f"run.axes.{path}: not sweepable; choose from {sorted(_SWEEP_AXES)}"
                    )
                elif not isinstance(values, list) or not values:
                    problems.append(f"run.axes.{path}: expected a non-empty list of values")
                elif not all(isinstance(v, _REAL) for v in values):
                    problems.append(f"run.axes.{path}: values must be numbers")


def parse_config(text: str, task: str) -> RunConfig:
    """Validate a TOML document against the task's schema.

    Raises ConfigError carrying every problem found, each with the config
    path and, where locatable, the source line.
    """
    if task not in TASKS:
        raise ConfigError([f"unknown task {task!r}; expected one of {TASKS}"])
    problems = []
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from None

    for section in doc:
        if section not in ("system", "run", "output"):
            problems.append(f"{section}: unknown section")

    system_kw = _check_section(doc, text, "system", _SYSTEM_SCHEMA, problems)
    run = _check_section(doc, text, "run", _RUN_SCHEMAS[task], problems)
    output_kw = _check_section(doc, text, "output", _OUTPUT_SCHEMA, problems)
    _validate_task_extras(task, run, problems)

    system = None
    if not any(p.startswith("system.") for p in problems):
        try:
            system = SystemParams(**{k: (float(v) if k != "n_fock" else int(v))
                                     for k, v in system_kw.items()})
        except Exception as exc:   # validation failures re-reported as config problems
            problems.append(f"system: {exc}")
    if problems:
        raise ConfigError(sorted(problems))
    return RunConfig(task=task, system=system, run=run,
                     output=OutputConfig(**output_kw))


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float):
        text = repr(value)
        return text if ("." in text or "e" in text or "inf" in text) else text + ".0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)}")


def config_to_toml(doc: dict) -> str:
    """Serialize a resolved config document back to TOML, deterministically."""
    lines = []
    for section in ("system", "run", "output"):
        body = doc.get(section, {})
        simple = {k: v for k, v in sorted(body.items()) if not isinstance(v, dict)}
        nested = {k: v for k, v in sorted(body.items()) if isinstance(v, dict)}
        lines.append(f"[{section}]")
        for key, value in simple.items():
            lines.append(f"{key} = {_toml_scalar(value)}")
        for key, sub in nested.items():
            lines.append(f"[{section}.{key}]")
            for k2, v2 in sorted(sub.items()):
                lines.append(f'"{k2}" = {_toml_scalar(v2)}')
        lines.append("")
    return "\n".join(lines)
