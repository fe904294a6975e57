"""Bath rates, dressed jump operators, and dissipative generators.

The dressed cavity channel couples through the out-of-phase quadrature
i(a^dag - a).  Its matrix elements between the low-energy eigenstates shrink
as e^{-r} while the in-phase ones stretch as e^{+r}; only the shrinking
quadrature reproduces the ladder rates gamma1*(1-g^2)(n+1) and
gamma1*(1-g^-4)(n+1) that the effective generators implement, so it is the
channel the dressed decomposition uses.  (Equivalently: the printed dressed
operators live in a phase-space frame rotated by pi/2.)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BinningError, CompositionError, DomainError, WrongPhaseError
from .model import (
    LabeledSpectrum,
    PhaseQuantities,
    SystemParams,
    phase_quantities,
    sigma_z_tilde,
)
from .operators import (
    displacement_operator,
    hermitian_eig,
    kron,
    pauli,
    quadrature,
    squeeze_operator,
)

__all__ = [
    "OhmicBath",
    "SpectralDensity",
    "JumpOperator",
    "GeneratorSpec",
    "ohmic_rate",
    "zero_frequency_dephasing",
    "default_baths",
    "default_couplings",
    "dressed_jump_operators",
    "sp_transition_amplitude",
    "generalized_liouvillian",
    "rwa_lindblad_np",
    "rwa_lindblad_sp",
    "dephasing_generator_np",
    "dephasing_generator_sp",
]


@dataclass(frozen=True)
class OhmicBath:
    """Zero-temperature Ohmic reservoir: Gamma(omega) = gamma*omega/f."""

    channel: str
    gamma: float
    f: float     # reference frequency: omega_c for the cavity, Omega_q for the qubit

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.f <= 0:
            raise ValueError("reference frequency must be positive")

    def rate(self, omega: float) -> float:
        if omega < 0:
            raise DomainError("rates are defined for omega >= 0; the adjoint handles omega < 0")
        return self.gamma * omega / self.f


@dataclass(frozen=True)
class SpectralDensity:
    """User-supplied coupling density s(nu) >= 0 with declared nu->0 behavior.

    ``s`` plays the role of g_k(nu)*|alpha_k(nu)|^2, so the transition rate is
    Gamma(omega) = 2*pi*s(omega).
    """

    channel: str
    s: Callable[[float], float]
    zero_limit: Optional[float] = None

    def rate(self, omega: float) -> float:
        if omega < 0:
            raise DomainError("rates are defined for omega >= 0; the adjoint handles omega < 0")
        if omega == 0:
            return zero_frequency_dephasing(self)
        return 2 * np.pi * self.s(omega)


def ohmic_rate(bath: OhmicBath, omega: float) -> float:
    """Gamma_k(omega) for an Ohmic bath; linear in omega, exactly 0 at omega=0."""
    return bath.rate(omega)


def zero_frequency_dephasing(bath) -> float:
    """Pure-dephasing rate from the nu->0 limit of the coupling density.

    Ohmic baths give exactly 0.  For a spectral-density hook the declared
    limit is used when present, otherwise the limit is probed numerically.
    """
    if isinstance(bath, OhmicBath):
        return 0.0
    if bath.zero_limit is not None:
        return 2 * np.pi * bath.zero_limit
    probes = [bath.s(nu) for nu in (1e-6, 1e-7, 1e-8, 1e-9)]
    if abs(probes[-1] - probes[-2]) > 1e-9 * max(1.0, abs(probes[-1])):
        raise DomainError("spectral density does not converge as nu -> 0; declare zero_limit")
    return 2 * np.pi * probes[-1]


@dataclass(frozen=True)
class JumpOperator:
    """One dressed transition operator at frequency omega >= 0.

    ``matrix`` lowers (connects upper states to lower ones); the omega < 0
    partner is the adjoint.  The omega = 0 operator collects the degenerate
    block and is Hermitian.
    """

    channel: str
    omega: float
    matrix: np.ndarray
    basis_id: str = field(default="", compare=False)


class GeneratorSpec:
    """A dissipative superoperator acting on retained-basis density matrices.

    Wraps a dense (d^2 x d^2) matrix in the row-major vec convention:
    vec(A rho B) = kron(A, B.T) vec(rho).  Generators add if their dimensions
    match and their basis fingerprints are compatible.
    """

    def __init__(self, kind: str, dim: int, matrix: np.ndarray,
                 basis_id: Optional[str] = None, parts: tuple = ()):
        self.kind = kind
        self.dim = dim
        self.matrix = matrix
        self.basis_id = basis_id
        self.parts = parts

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise CompositionError(f"density matrix shape {rho.shape} != ({self.dim}, {self.dim})")
        return (self.matrix @ rho.reshape(-1)).reshape(self.dim, self.dim)

    def __add__(self, other: "GeneratorSpec") -> "GeneratorSpec":
        if not isinstance(other, GeneratorSpec):
            return NotImplemented
        if self.dim != other.dim:
            raise CompositionError(f"generator dimensions differ: {self.dim} vs {other.dim}")
        if self.basis_id and other.basis_id and self.basis_id != other.basis_id:
            raise CompositionError("generators were built on different retained bases")
        return GeneratorSpec(
            kind="composite",
            dim=self.dim,
            matrix=self.matrix + other.matrix,
            basis_id=self.basis_id or other.basis_id,
            parts=(self, other),
        )

    def __repr__(self):
        return f"GeneratorSpec(kind={self.kind!r}, dim={self.dim})"


def _vec_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho @ b in the row-major vec convention."""
    return np.kron(a, b.T)


def _lindblad_superop(op: np.ndarray, rate: float) -> np.ndarray:
    d = op.shape[0]
    eye = np.eye(d, dtype=complex)
    od = op.conj().T
    return rate * (
        _vec_kron(op, od) - 0.5 * _vec_kron(od @ op, eye) - 0.5 * _vec_kron(eye, od @ op)
    )


def default_couplings(params: SystemParams) -> dict:
    """Full-space coupling operators per channel.

    cavity: out-of-phase quadrature i(a^dag - a) (x) identity;
    qubit:  identity (x) (sigma_- + sigma_+).
    """
    i_q = np.eye(2, dtype=complex)
    i_f = np.eye(params.n_fock, dtype=complex)
    return {
        "cavity": kron(quadrature(params.n_fock, "out_of_phase"), i_q),
        "qubit": kron(i_f, pauli("x")),
    }


def default_baths(params: SystemParams) -> dict:
    """Ohmic baths with the model's relaxation parameters."""
    return {
        "cavity": OhmicBath("cavity", params.gamma1, params.omega_c),
        "qubit": OhmicBath("qubit", params.gamma2, params.omega_q),
    }


def dressed_jump_operators(
    spectrum: LabeledSpectrum,
    couplings: Optional[dict] = None,
    bin_tol: float = 1e-6,
) -> list:
    """Decompose each coupling operator into frequency-binned jump operators.

    Matrix elements <E_i|X|E_j> are grouped by the transition frequency
    E_j - E_i; elements within ``bin_tol`` (units of omega_c) share one bin
    whose frequency is their |element|^2-weighted mean.  The near-degenerate
    block (|dE| <= bin_tol) forms the Hermitian omega = 0 operator.  Each
    omega > 0 operator is rephased so its largest element is real positive.
    """
    if bin_tol <= 0:
        raise ValueError("bin_tol must be positive")
    if couplings is None:
        couplings = default_couplings(spectrum.params)
    v = spectrum.states
    energies = spectrum.energies
    m = spectrum.n_kept
    level_gaps = np.diff(energies)
    resolved = level_gaps[level_gaps > bin_tol]
    min_level_gap = float(resolved.min()) if resolved.size else np.inf
    if bin_tol > 0.5 * min_level_gap:
        raise BinningError(
            f"bin_tol={bin_tol:.3e} exceeds half the smallest resolved level "
            f"gap {min_level_gap:.3e}; distinct transitions would merge"
        )
    jumps = []
    for channel in sorted(couplings):
        x_full = np.asarray(couplings[channel], dtype=complex)
        if x_full.shape == (m, m):
            a = x_full
        elif x_full.shape == (v.shape[0], v.shape[0]):
            a = v.conj().T @ x_full @ v
        else:
            raise CompositionError(
                f"coupling {channel!r} has shape {x_full.shape}; expected retained "
                f"({m}, {m}) or full {(v.shape[0], v.shape[0])}"
            )
        amp_floor = 1e-12 * max(np.abs(a).max(), 1.0)

        zero_op = np.zeros((m, m), dtype=complex)
        elems = []   # (omega, i, j) with omega > bin_tol
        for i in range(m):
            for j in range(m):
                if abs(a[i, j]) <= amp_floor:
                    continue
                om = energies[j] - energies[i]
                if abs(om) <= bin_tol:
                    zero_op[i, j] = a[i, j]
                elif om > 0:
                    elems.append((float(om), i, j))

        if np.abs(zero_op).max() > amp_floor:
            jumps.append(JumpOperator(channel, 0.0, zero_op, spectrum.basis_id))

        elems.sort(key=lambda t: (t[0], t[1], t[2]))
        bins = []
        for om, i, j in elems:
            if bins and om - bins[-1][-1][0] <= bin_tol:
                bins[-1].append((om, i, j))
            else:
                bins.append([(om, i, j)])

        means = []
        widths = []
        for group in bins:
            mat = np.zeros((m, m), dtype=complex)
            weights = np.array([abs(a[i, j]) ** 2 for _, i, j in group])
            omegas = np.array([om for om, _, _ in group])
            for _, i, j in group:
                mat[i, j] = a[i, j]
            mean = float(np.sum(weights * omegas) / np.sum(weights))
            means.append(mean)
            widths.append(omegas.max() - omegas.min())
            # deterministic phase: largest element real positive
            k = np.unravel_index(np.argmax(np.abs(mat)), mat.shape)
            mat = mat * (np.abs(mat[k]) / mat[k])
            jumps.append(JumpOperator(channel, mean, mat, spectrum.basis_id))

        if widths and max(widths) > 0.5 * min_level_gap:
            raise BinningError(
                f"channel {channel!r}: bin width {max(widths):.3e} exceeds half the "
                f"smallest resolved level gap {min_level_gap:.3e}; adjust bin_tol"
            )
    return jumps


def sp_transition_amplitude(
    n: int, m: int, l: int, l_prime: int,
    quantities: PhaseQuantities, cutoff: int,
) -> complex:
    """Dressed cavity amplitude between superradiant branch states.

    Dense-product evaluation of
    <n| S(r)^dag D(l*alpha)^dag (a + a^dag) D(l'*alpha) S(r) |m>
    with the shrinking squeeze convention, i.e. the pi/2-rotated frame in
    which the dressed ladder element is e^{-r} sqrt(n+1).
    """
    if quantities.phase != "SP":
        raise WrongPhaseError("branch amplitudes exist only in the superradiant phase")
    if l not in (+1, -1) or l_prime not in (+1, -1):
        raise ValueError("branch labels must be +1 or -1")
    s = squeeze_operator(quantities.squeeze, cutoff, n_max_used=max(n, m))
    x = quadrature(cutoff, "in_phase")
    d_l = displacement_operator(l * quantities.alpha, cutoff)
    d_lp = d_l if l_prime == l else displacement_operator(l_prime * quantities.alpha, cutoff)
    mat = s.conj().T @ d_l.conj().T @ x @ d_lp @ s
    return complex(mat[n, m])


def generalized_liouvillian(
    jumps: list,
    baths: dict,
    secular_cutoff: Optional[float] = None,
) -> GeneratorSpec:
    """Non-secular dissipator from the full double sum over frequency pairs.

    For every channel k and ordered pair (omega, omega') of binned jump
    frequencies the superoperator accumulates

        Gamma_k(omega)/2  [L(w) rho L(w')^dag - L(w')^dag L(w) rho]
      + Gamma_k(omega')/2 [L(w) rho L(w')^dag - rho L(w')^dag L(w)]

    with L(-w) realized as L(w)^dag.  ``secular_cutoff`` optionally drops
    pairs with |omega - omega'| above it (default keeps every pair).
    """
    if not jumps:
        raise CompositionError("no jump operators supplied")
    dim = jumps[0].matrix.shape[0]
    basis = jumps[0].basis_id
    for j in jumps:
        if j.matrix.shape != (dim, dim) or j.basis_id != basis:
            raise CompositionError("jump operators disagree on the retained basis")
        if j.channel not in baths:
            raise CompositionError(f"no bath registered for channel {j.channel!r}")

    eye = np.eye(dim, dtype=complex)
    sup = np.zeros((dim * dim, dim * dim), dtype=complex)
    by_channel = {}
    for j in jumps:
        by_channel.setdefault(j.channel, []).append(j)
    for channel, ops in by_channel.items():
        bath = baths[channel]
        rates = [bath.rate(j.omega) if j.omega > 0 else zero_frequency_dephasing(bath)
                 for j in ops]
        for jw, gw in zip(ops, rates):
            lw = jw.matrix
            for jwp, gwp in zip(ops, rates):
                if secular_cutoff is not None and abs(jw.omega - jwp.omega) > secular_cutoff:
                    continue
                if gw == 0.0 and gwp == 0.0:
                    continue
                ld = jwp.matrix.conj().T
                sandwich = _vec_kron(lw, ld)
                sup += 0.5 * gw * (sandwich - _vec_kron(ld @ lw, eye))
                sup += 0.5 * gwp * (sandwich - _vec_kron(eye, ld @ lw))
    return GeneratorSpec("full_nonsecular", dim, sup, basis_id=basis)


def _ladder_op(dim: int, lower: int, upper: int) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=complex)
    op[lower, upper] = 1.0
    return op


def rwa_lindblad_np(params: SystemParams, m_keep: int = 10) -> GeneratorSpec:
    """Normal-phase ladder dissipator: rates gamma1*(1-g^2)*(n+1)."""
    if params.g >= 1:
        raise WrongPhaseError(f"rwa_np needs g < 1, got g={params.g}")
    g = params.g
    sup = np.zeros((m_keep * m_keep, m_keep * m_keep), dtype=complex)
    for n in range(m_keep - 1):
        rate = params.gamma1 * (1 - g * g) * (n + 1)
        sup += _lindblad_superop(_ladder_op(m_keep, n, n + 1), rate)
    return GeneratorSpec("rwa_np", m_keep, sup)


def rwa_lindblad_sp(params: SystemParams, m_keep: int = 10) -> GeneratorSpec:
    """Superradiant dissipator: one decoupled ladder per branch.

    Retained-basis indices interleave doublets as (n,+), (n,-), (n+1,+), ...;
    rates are gamma1*(1-g^-4)*(n+1) within each branch, no cross-branch terms.
    """
    if params.g <= 1:
        raise WrongPhaseError(f"rwa_sp needs g > 1, got g={params.g}")
    if m_keep % 2:
        raise ValueError("superradiant retained basis holds whole doublets; m_keep must be even")
    g = params.g
    n_doublets = m_keep // 2
    sup = np.zeros((m_keep * m_keep, m_keep * m_keep), dtype=complex)
    for n in range(n_doublets - 1):
        rate = params.gamma1 * (1 - g**-4) * (n + 1)
        for off in (0, 1):   # branch +, branch -
            sup += _lindblad_superop(_ladder_op(m_keep, 2 * n + off, 2 * (n + 1) + off), rate)
    return GeneratorSpec("rwa_sp", m_keep, sup)


def dephasing_generator_np(params: SystemParams, m_keep: int = 10) -> GeneratorSpec:
    """Normal-phase pure dephasing.

    Cavity part: (kappa_c_phi/2) D[sum_n w_n |E_n><E_n|] with the photon
    weights w_n = n*cosh(2r) + sinh(r)^2, equal to cosh(2r)^2 times D of the
    bare ladder-index operator.  Qubit part: the weights <E_n|sigma_z|E_n>
    are all -1, a multiple of the identity, so its dissipator vanishes.
    """
    q = phase_quantities(params)
    if q.phase != "NP":
        raise WrongPhaseError(f"dephasing_np needs g < 1, got g={params.g}")
    r = q.squeeze
    n_idx = np.arange(m_keep, dtype=float)
    w_cav = n_idx * np.cosh(2 * r) + np.sinh(r) ** 2
    w_qub = -np.ones(m_keep)
    sup = _lindblad_superop(np.diag(w_cav).astype(complex), 0.5 * params.kappa_c_phi)
    sup += _lindblad_superop(np.diag(w_qub).astype(complex), 0.5 * params.kappa_q_phi)
    return GeneratorSpec("dephasing_np", m_keep, sup)


def dephasing_generator_sp(params: SystemParams, m_keep: int = 10) -> GeneratorSpec:
    """Superradiant pure dephasing, branch-blind in the ladder index.

    Photon weights n*cosh(2r) + sinh(r)^2 + alpha^2 per branch; the constant
    offsets drop inside the dissipator, leaving
    (kappa_c_phi/2) cosh(2r)^2 D[sum_{n,l} n |E_n^l><E_n^l|].  The qubit
    weights are branch-independent constants and contribute nothing.
    """
    q = phase_quantities(params)
    if q.phase != "SP":
        raise WrongPhaseError(f"dephasing_sp needs g > 1, got g={params.g}")
    if m_keep % 2:
        raise ValueError("superradiant retained basis holds whole doublets; m_keep must be even")
    r = q.squeeze
    ladder = np.repeat(np.arange(m_keep // 2, dtype=float), 2)
    w_cav = ladder * np.cosh(2 * r) + np.sinh(r) ** 2 + q.alpha**2
    qubit_ground = hermitian_eig(sigma_z_tilde(params, +1)).vectors[:, 0]
    sz_expect = float(np.real(qubit_ground.conj() @ (pauli("z") @ qubit_ground)))
    w_qub = sz_expect * np.ones(m_keep)
    sup = _lindblad_superop(np.diag(w_cav).astype(complex), 0.5 * params.kappa_c_phi)
    sup += _lindblad_superop(np.diag(w_qub).astype(complex), 0.5 * params.kappa_q_phi)
    return GeneratorSpec("dephasing_sp", m_keep, sup)
