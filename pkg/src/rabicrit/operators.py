"""Dense complex matrix constructors for the cavity-qubit problem.

Everything works on plain ``numpy`` arrays of ``complex128``; matrices are
dense throughout since retained dimensions stay in the hundreds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidDimensionError, SymmetryError, TruncationRiskError

__all__ = [
    "HermitianEigen",
    "fock_annihilation",
    "number_operator",
    "quadrature",
    "pauli",
    "kron",
    "matrix_exponential",
    "squeeze_operator",
    "displacement_operator",
    "hermitian_eig",
    "is_hermitian",
]


@dataclass(frozen=True)
class HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    ``values`` ascend; ``vectors[:, k]`` is the k-th orthonormal eigenvector
    with its largest-magnitude component rotated real and positive.
    """

    values: np.ndarray
    vectors: np.ndarray


def fock_annihilation(cutoff: int) -> np.ndarray:
    """Annihilation operator on a Fock space truncated at ``cutoff`` levels.

    ``<n-1|a|n> = sqrt(n)``; the top corner of ``[a, a^dag]`` carries the
    truncation defect ``1 - cutoff``.
    """
    if cutoff < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)


def number_operator(cutoff: int) -> np.ndarray:
    """diag(0, 1, ..., cutoff-1)."""
    if cutoff < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {cutoff}")
    return np.diag(np.arange(cutoff, dtype=float)).astype(complex)


def quadrature(cutoff: int, which: str = "in_phase") -> np.ndarray:
    """Field quadrature: ``in_phase`` is a + a^dag, ``out_of_phase`` is i(a^dag - a)."""
    a = fock_annihilation(cutoff)
    if which == "in_phase":
        return a + a.conj().T
    if which == "out_of_phase":
        return 1j * (a.conj().T - a)
    raise ValueError(f"unknown quadrature {which!r}")


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}


def pauli(which: str) -> np.ndarray:
    """Pauli matrix in the basis (|up>, |down>); sigma_z |down> = -|down>.

    ``minus`` lowers: <down| sigma_minus |up> = 1.
    """
    try:
        return _PAULI[which].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {which!r}") from None


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product (first factor varies slowest)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def matrix_exponential(m: np.ndarray) -> np.ndarray:
    """exp(m) for a square matrix, via scaling-and-squaring."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidDimensionError(f"matrix exponential needs a square matrix, got {m.shape}")
    return expm(m)


def squeeze_operator(r: float, cutoff: int, n_max_used: int = 0) -> np.ndarray:
    """Single-mode squeeze exp[(r/2)(a^2 - a^dag^2)] on the truncated space.

    Sign convention: conjugation shrinks the in-phase quadrature,
    S(r)^dag (a + a^dag) S(r) = e^{-r} (a + a^dag); negative ``r`` stretches it.
    ``n_max_used`` names the highest Fock level the caller will squeeze; its
    image must not leak into the top of the truncated block.
    """
    if cutoff < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {cutoff}")
    if abs(r) > 0.25 * np.log(cutoff):
        raise TruncationRiskError(
            f"|r|={abs(r):.4f} exceeds the truncation guard 0.25*ln({cutoff})={0.25 * np.log(cutoff):.4f}"
        )
    a = fock_annihilation(cutoff)
    s = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    tail = np.abs(s[-2:, : n_max_used + 1]).max()
    if tail > 1e-8:
        raise TruncationRiskError(
            f"squeezed |{n_max_used}> has amplitude {tail:.2e} at the Fock boundary; raise the cutoff"
        )
    return s


def displacement_operator(alpha: float, cutoff: int) -> np.ndarray:
    """Displacement exp[alpha (a^dag - a)]; D(alpha)|0> is coherent at alpha."""
    if cutoff < 2:
        raise InvalidDimensionError(f"Fock cutoff must be >= 2, got {cutoff}")
    if cutoff < alpha * alpha + 6 * abs(alpha) + 10:
        raise TruncationRiskError(
            f"cutoff {cutoff} too small for displacement {alpha:.3f}; "
            f"need >= {alpha * alpha + 6 * abs(alpha) + 10:.0f}"
        )
    a = fock_annihilation(cutoff)
    return expm(alpha * (a.conj().T - a))


def is_hermitian(m: np.ndarray, rtol: float = 1e-12) -> bool:
    """Max-entry Hermiticity check, relative to the largest entry."""
    m = np.asarray(m)
    scale = max(np.abs(m).max(), 1.0)
    return bool(np.abs(m - m.conj().T).max() < rtol * scale)


def hermitian_eig(m: np.ndarray, rtol: float = 1e-10) -> HermitianEigen:
    """Eigendecomposition with a deterministic phase convention.

    Each eigenvector is rotated so its largest-magnitude component is real
    and positive, making branch labels and coherence signs reproducible.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidDimensionError(f"eigendecomposition needs a square matrix, got {m.shape}")
    if not is_hermitian(m, rtol=rtol):
        raise SymmetryError("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh(m)
    vectors = fix_phases(vectors)
    return HermitianEigen(values=values, vectors=vectors)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    vectors = np.array(vectors, dtype=complex)
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    phases = lead / np.abs(lead)
    return vectors / phases
