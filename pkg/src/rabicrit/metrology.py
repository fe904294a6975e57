"""Phase-estimation bounds for a dephased oscillator-ladder probe.

The probe lives on the normal-phase ladder index n, where the low-energy
model is a harmonic oscillator; after a phase Phi and Gaussian dephasing of
strength beta the off-diagonal elements pick up
exp(-i*Phi*(m-n) - beta^2*(m-n)^2).  The purification bound
C_Q(zeta) = (1-zeta)^2 * 4*Var(n) + zeta^2/(2 beta^2) is minimized in closed
form and cross-checked against an explicit oscillator-environment
purification and against the exact quantum Fisher information.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .operators import fock_annihilation, matrix_exponential

__all__ = [
    "ProbeState",
    "DephasingStrength",
    "MetrologyReport",
    "beta_from_dynamics",
    "dephased_probe",
    "number_variance",
    "cq_bound",
    "optimal_zeta",
    "cq_min",
    "phase_bound",
    "qfi_exact",
    "purification_cq",
    "metrology_report",
]


@dataclass(frozen=True)
class ProbeState:
    """Pure probe sum_n C_n |E_n> over the ladder index."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        if abs(np.vdot(c, c).real - 1.0) > 1e-12:
            raise ValueError("probe coefficients must be normalized to 1e-12")

    @staticmethod
    def superposition(*terms) -> "ProbeState":
        """Probe from (coefficient, index) pairs, normalized."""
        size = max(idx for _, idx in terms) + 1
        c = np.zeros(size, dtype=complex)
        for coeff, idx in terms:
            c[idx] += coeff
        return ProbeState(c / np.linalg.norm(c))


@dataclass(frozen=True)
class DephasingStrength:
    beta: float
    provenance: str = "direct"

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")


@dataclass(frozen=True)
class MetrologyReport:
    delta_n_sq: float
    zeta_star: float
    cq: float
    fq_exact: float
    delta_phi: float
    nu: int


def beta_from_dynamics(kappa_c_phi: float, r: float, t: float) -> DephasingStrength:
    """Dephasing strength matching the coherence envelope of the dynamics.

    beta = cosh(2r)*sqrt(kappa_c_phi*t)/2, fixed so exp(-beta^2 (m-n)^2)
    equals the off-diagonal decay at rate (kappa/4) cosh(2r)^2 (m-n)^2.
    """
    if kappa_c_phi < 0 or t < 0:
        raise ValueError("kappa_c_phi and t must be non-negative")
    beta = np.cosh(2 * r) * np.sqrt(kappa_c_phi * t) / 2.0
    return DephasingStrength(beta=float(beta),
                             provenance=f"from_dynamics(kappa={kappa_c_phi}, r={r}, t={t})")


def dephased_probe(probe: ProbeState, phi: float, beta: float) -> np.ndarray:
    """Probe density matrix after phase phi and dephasing beta.

    rho_mn -> rho_mn * exp(-i*phi*(m-n) - beta^2*(m-n)^2); the diagonal is
    untouched.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    c = probe.coefficients
    rho = np.outer(c, c.conj())
    n = np.arange(len(c))
    dmn = n[:, None] - n[None, :]
    return rho * np.exp(-1j * phi * dmn - beta * beta * dmn**2)


def number_variance(probe: ProbeState) -> float:
    """Variance of the ladder index in the probe."""
    p = np.abs(probe.coefficients) ** 2
    n = np.arange(len(p))
    mean = float(np.sum(p * n))
    return float(np.sum(p * n * n) - mean * mean)


def cq_bound(delta_n_sq: float, beta: float, zeta: float) -> float:
    """Purification bound C_Q(zeta) = (1-zeta)^2 * 4*Var(n) + zeta^2/(2 beta^2)."""
    if not 0 <= zeta <= 1:
        raise ValueError("zeta must lie in [0, 1]")
    if beta == 0:
        if zeta > 0:
            raise DomainError("beta=0 makes the zeta^2/(2 beta^2) term singular; use zeta=0")
        return 4.0 * delta_n_sq
    return (1 - zeta) ** 2 * 4.0 * delta_n_sq + zeta * zeta / (2 * beta * beta)


def optimal_zeta(delta_n_sq: float, beta: float) -> float:
    """Minimizer zeta* = 8*Var(n)*beta^2 / (1 + 8*Var(n)*beta^2)."""
    if delta_n_sq < 0 or beta < 0:
        raise ValueError("inputs must be non-negative")
    x = 8.0 * delta_n_sq * beta * beta
    return x / (1.0 + x)


def cq_min(delta_n_sq: float, beta: float) -> float:
    """Minimum of the purification bound: 4*Var(n) / (1 + 8*Var(n)*beta^2)."""
    if delta_n_sq < 0 or beta < 0:
        raise ValueError("inputs must be non-negative")
    return 4.0 * delta_n_sq / (1.0 + 8.0 * delta_n_sq * beta * beta)


def phase_bound(nu: int, delta_n_sq: float, beta: float) -> float:
    """Precision floor sqrt(1/(4 nu Var(n)) + 2 beta^2/nu) = 1/sqrt(nu*C_Q_min)."""
    if nu < 1:
        raise ValueError("nu must be at least 1")
    if delta_n_sq <= 0:
        raise ValueError("the bound needs Var(n) > 0")
    return float(np.sqrt(1.0 / (4.0 * nu * delta_n_sq) + 2.0 * beta * beta / nu))


def qfi_exact(rho: np.ndarray, generator: np.ndarray = None, eps: float = 1e-12) -> float:
    """Quantum Fisher information via the spectral SLD formula.

    F_Q = sum over eigenpairs with p_i + p_j > eps of
    2 |<i| d_phi rho |j>|^2 / (p_i + p_j), with d_phi rho = -i [N, rho] and
    N the ladder-index operator by default.
    """
    rho = np.asarray(rho, dtype=complex)
    if generator is None:
        generator = np.diag(np.arange(rho.shape[0], dtype=float)).astype(complex)
    drho = -1j * (generator @ rho - rho @ generator)
    p, u = np.linalg.eigh(rho)
    d = u.conj().T @ drho @ u
    psum = p[:, None] + p[None, :]
    mask = psum > eps
    fq = 2.0 * np.sum((np.abs(d) ** 2)[mask] / psum[mask])
    return float(fq)


def purification_cq(probe: ProbeState, beta: float, zeta: float,
                    env_cutoff: int = 48) -> float:
    """Direct-variance evaluation of C_Q on an explicit purification.

    Builds |psi> = exp(i 2 beta N (x) X_E) |probe>|0_E> on a truncated
    environment oscillator and returns 4*Var(N (x) 1 - zeta*P_E/(2 beta)),
    the quantity the closed-form bound minimizes over zeta.
    """
    if beta <= 0:
        raise DomainError("the explicit purification needs beta > 0")
    c = probe.coefficients
    dim_s = len(c)
    b = fock_annihilation(env_cutoff)
    x_e = (b + b.conj().T) / np.sqrt(2)
    p_e = 1j * (b.conj().T - b) / np.sqrt(2)
    n_s = np.diag(np.arange(dim_s, dtype=float)).astype(complex)
    eye_s = np.eye(dim_s, dtype=complex)
    eye_e = np.eye(env_cutoff, dtype=complex)

    coupling = matrix_exponential(1j * 2 * beta * np.kron(n_s, x_e))
    vac = np.zeros(env_cutoff, dtype=complex)
    vac[0] = 1.0
    psi = coupling @ np.kron(c, vac)
    tail = np.abs(psi.reshape(dim_s, env_cutoff)[:, -4:]).max()
    if tail > 1e-6:
        raise DomainError("environment cutoff too small for this beta; raise env_cutoff")

    m = np.kron(n_s, eye_e) - (zeta / (2 * beta)) * np.kron(eye_s, p_e)
    mean = np.vdot(psi, m @ psi).real
    second = np.vdot(psi, m @ (m @ psi)).real
    return float(4.0 * (second - mean * mean))


def metrology_report(probe: ProbeState, beta: float, nu: int = 1,
                     phi: float = np.pi / 4) -> MetrologyReport:
    """Assemble the closed-form bounds and the exact QFI for one probe."""
    dn2 = number_variance(probe)
    zeta = optimal_zeta(dn2, beta)
    cq = cq_min(dn2, beta)
    fq = qfi_exact(dephased_probe(probe, phi, beta))
    dphi = phase_bound(nu, dn2, beta)
    return MetrologyReport(delta_n_sq=dn2, zeta_star=zeta, cq=cq,
                           fq_exact=fq, delta_phi=dphi, nu=nu)
