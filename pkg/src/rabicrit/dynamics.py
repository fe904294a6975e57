"""Density-matrix evolution in the retained eigenbasis.

The coherent part is an optional diagonal Hamiltonian; population-only
studies may drop it (diagonal commutators leave populations untouched), and
recorded coherences are moduli, unaffected by the deterministic rotation.
Positivity is monitored, never repaired: non-secular generators may push
eigenvalues slightly negative and the caller must see it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dissipators import GeneratorSpec
from .errors import (
    FitError,
    IntegrationFailureError,
    StiffnessError,
    SymmetryError,
)

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "check_density_matrix",
    "evolve",
    "coherence_element",
    "fit_decay_rate",
    "stationarity_check",
]

logger = logging.getLogger("rabicrit.dynamics")

NEGATIVITY_FLOOR = -1e-7
TRACE_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    method: str = "fixed_rk4"        # or "adaptive_rkf45"
    dt: float = 0.02                 # max step for fixed_rk4 / initial step for rkf45
    n_record: int = 201
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    resym_every: int = 10            # steps between Hermiticity re-symmetrization

    def __post_init__(self):
        if self.t_end <= 0 or self.dt <= 0:
            raise ValueError("t_end and dt must be positive")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.n_record < 2:
            raise ValueError("need at least two record points")
        if self.method not in ("fixed_rk4", "adaptive_rkf45"):
            raise ValueError(f"unknown integrator {self.method!r}")


@dataclass
class Trajectory:
    """Observable records on a fixed time grid (units 1/omega_c)."""

    times: np.ndarray
    populations: np.ndarray                  # shape (T, dim)
    coherences: dict                         # (i, j) -> |<E_j| rho |E_i>| series
    trace_drift: np.ndarray
    min_eig: np.ndarray
    dim: int = field(default=0)

    def __post_init__(self):
        if not self.dim:
            self.dim = self.populations.shape[1]


def check_density_matrix(rho: np.ndarray, trace_tol: float = 1e-9, herm_tol: float = 1e-10):
    """Validate trace, Hermiticity, and the monitored negativity floor."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise ValueError(f"trace {np.trace(rho):.3e} != 1")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise SymmetryError("density matrix is not Hermitian within tolerance")
    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < NEGATIVITY_FLOOR:
        logger.warning("density matrix eigenvalue %.3e below the monitoring floor", min_eig)
    return rho


def _hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


# Fehlberg 4(5) tableau
_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8, 3680 / 513, -845 / 4104),
    (-8 / 27, 2, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF_B5 = (16 / 135, 0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RKF_B4 = (25 / 216, 0, 1408 / 2565, 2197 / 4104, -1 / 5, 0)


def _rk4_span(a: np.ndarray, y: np.ndarray, t0: float, t1: float, dt_max: float):
    n_sub = max(1, int(np.ceil((t1 - t0) / dt_max)))
    h = (t1 - t0) / n_sub
    for _ in range(n_sub):
        k1 = a @ y
        k2 = a @ (y + 0.5 * h * k1)
        k3 = a @ (y + 0.5 * h * k2)
        k4 = a @ (y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y, n_sub


def _rkf45_span(a: np.ndarray, y: np.ndarray, t0: float, t1: float, h0: float,
                abs_tol: float, rel_tol: float):
    t, h = t0, min(h0, t1 - t0)
    steps = 0
    h_floor = 1e-14 * max(t1, 1.0)
    while t < t1 - 1e-15 * max(t1, 1.0):
        h = min(h, t1 - t)
        if h < h_floor:
            raise StiffnessError(f"adaptive step underflow at t={t:.6g}")
        k = []
        for row in _RKF_A:
            yi = y + h * sum(c * ki for c, ki in zip(row, k)) if row else y
            k.append(a @ yi)
        y5 = y + h * sum(b * ki for b, ki in zip(_RKF_B5, k))
        y4 = y + h * sum(b * ki for b, ki in zip(_RKF_B4, k))
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.max(np.abs(y5 - y4) / scale))
        if err <= 1.0:
            t += h
            y = y5
            steps += 1
        factor = 0.9 * (err ** -0.2) if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return y, steps, h


def evolve(
    h_coherent: Optional[np.ndarray],
    generator: GeneratorSpec,
    rho0: np.ndarray,
    config: IntegratorConfig,
    coherence_pairs: tuple = (),
) -> Trajectory:
    """Integrate d rho/dt = -i[H, rho] + G rho and record observables.

    ``h_coherent`` is the retained-basis Hamiltonian (usually diag of the
    spectrum energies) or None to evolve under the dissipator alone.
    Hermiticity is re-symmetrized every ``resym_every`` steps; trace drift
    beyond 1e-6 aborts, negativity beyond the floor is logged and recorded.
    """
    dim = generator.dim
    rho0 = check_density_matrix(rho0)
    if rho0.shape != (dim, dim):
        raise ValueError(f"initial state dimension {rho0.shape[0]} != generator dimension {dim}")
    a = generator.matrix
    if h_coherent is not None:
        h_coherent = np.asarray(h_coherent, dtype=complex)
        if h_coherent.shape != (dim, dim):
            raise ValueError("coherent Hamiltonian dimension mismatch")
        a = a + _hamiltonian_superop(h_coherent)

    times = np.linspace(0.0, config.t_end, config.n_record)
    pops = np.empty((config.n_record, dim))
    drift = np.empty(config.n_record)
    mineig = np.empty(config.n_record)
    coh = {pair: np.empty(config.n_record) for pair in coherence_pairs}

    y = rho0.reshape(-1).astype(complex)
    steps_since_resym = 0
    h_adaptive = config.dt
    for idx, t in enumerate(times):
        if idx > 0:
            if config.method == "fixed_rk4":
                y, n_sub = _rk4_span(a, y, times[idx - 1], t, config.dt)
            else:
                y, n_sub, h_adaptive = _rkf45_span(
                    a, y, times[idx - 1], t, h_adaptive, config.abs_tol, config.rel_tol
                )
            steps_since_resym += n_sub
            if steps_since_resym >= config.resym_every:
                rho = y.reshape(dim, dim)
                y = (0.5 * (rho + rho.conj().T)).reshape(-1)
                steps_since_resym = 0
        rho = y.reshape(dim, dim)
        tr = np.trace(rho)
        drift[idx] = abs(tr - 1.0)
        if drift[idx] > TRACE_DRIFT_LIMIT:
            raise IntegrationFailureError(
                f"trace drift {drift[idx]:.3e} at t={t:.6g} exceeds {TRACE_DRIFT_LIMIT}"
            )
        pops[idx] = np.real(np.diag(rho))
        herm = 0.5 * (rho + rho.conj().T)
        mineig[idx] = float(np.linalg.eigvalsh(herm).min())
        if mineig[idx] < NEGATIVITY_FLOOR:
            logger.warning("positivity violation %.3e at t=%.6g", mineig[idx], t)
        for (i, j) in coherence_pairs:
            coh[(i, j)][idx] = abs(rho[j, i])

    return Trajectory(times=times, populations=pops, coherences=coh,
                      trace_drift=drift, min_eig=mineig, dim=dim)


def coherence_element(traj: Trajectory, i: int, j: int) -> np.ndarray:
    """|<E_j| rho(t) |E_i>| series for a pair requested at evolve time."""
    try:
        return traj.coherences[(i, j)]
    except KeyError:
        raise ValueError(f"coherence pair ({i}, {j}) was not requested at evolve time") from None


def fit_decay_rate(times: np.ndarray, series: np.ndarray,
                   misfit_tol: float = 0.05) -> tuple:
    """Single-exponential rate from a log-linear least squares fit.

    Returns (rate, stderr).  Rejects series that are short, span fewer than
    two e-foldings, grow along the way, or leave log-residuals above
    ``misfit_tol`` (a two-exponential signature).
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if len(series) < 20:
        raise FitError(f"need at least 20 points, got {len(series)}")
    if np.any(series <= 0):
        raise FitError("series must be strictly positive for a log fit")
    if series[0] / series[-1] < np.e**2:
        raise FitError("series spans fewer than 2 e-foldings")
    rises = np.diff(series) > 1e-9 * series[0]
    if np.any(rises):
        raise FitError("series is not monotonically decaying")
    logs = np.log(series)
    coeffs, cov = np.polyfit(times, logs, 1, cov=True)
    residuals = logs - np.polyval(coeffs, times)
    rms = float(np.sqrt(np.mean(residuals**2)))
    if rms > misfit_tol:
        raise FitError(f"log-residual rms {rms:.3f} exceeds {misfit_tol}; not a single exponential")
    rate = -float(coeffs[0])
    stderr = float(np.sqrt(cov[0, 0]))
    return rate, stderr


def stationarity_check(generator: GeneratorSpec, state: np.ndarray) -> float:
    """Max-entry norm of G(|s><s|); small values certify a dark state."""
    state = np.asarray(state, dtype=complex)
    state = state / np.linalg.norm(state)
    rho = np.outer(state, state.conj())
    return float(np.abs(generator.apply(rho)).max())
