"""Dense Hermitian linear algebra for small matrices (d <= 8).

Eigendecompositions come from a cyclic complex Jacobi solver (compiled when
available, see :mod:`qgeom._backend`). Matrices are plain ``numpy`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from qgeom._backend import kernels
from qgeom.errors import DimensionMismatch, DomainError, NotHermitian

HERMITIAN_ATOL = 1e-9
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
# eigenvalues in [-NEG_CLAMP, 0) are treated as round-off and set to zero
NEG_CLAMP = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return from_eigen(self.eigenvalues, self.eigenvectors)


def as_square(H) -> np.ndarray:
    A = np.asarray(H, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def hermitian_error(H) -> float:
    A = as_square(H)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def check_hermitian(H, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    A = as_square(H)
    err = hermitian_error(A)
    if err > atol:
        raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e} (> {atol:g})")
    return A


def eigh_batch(stack) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose an ``(n, d, d)`` stack without validation."""
    w, V, _ = kernels.eigh(np.asarray(stack, dtype=np.complex128), JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return w, V


def hermitian_eigen(H) -> EigenDecomposition:
    A = check_hermitian(H)
    w, V = eigh_batch(A[None])
    return EigenDecomposition(w[0], V[0])


def from_eigen(w, V) -> np.ndarray:
    """``V diag(w) V^dagger``; broadcasts over leading batch axes."""
    V = np.asarray(V)
    return (V * np.asarray(w)[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


def clamp_roundoff(w: np.ndarray) -> np.ndarray:
    w = np.array(w, dtype=np.float64, copy=True)
    w[(w < 0) & (w >= -NEG_CLAMP)] = 0.0
    return w


def matrix_function(
    H, f: Callable[[np.ndarray], np.ndarray], eig: EigenDecomposition | None = None
) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    ``f`` receives the (round-off clamped) eigenvalue array. A non-finite
    value of ``f`` at any eigenvalue raises :class:`DomainError`, so
    ``np.log`` on a singular matrix is rejected here.
    """
    if eig is None:
        eig = hermitian_eigen(H)
    w = clamp_roundoff(eig.eigenvalues)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(w), dtype=np.float64)
    if not np.all(np.isfinite(fw)):
        bad = w[~np.isfinite(fw)]
        raise DomainError(f"function undefined at eigenvalue(s) {bad.tolist()}")
    return from_eigen(fw, eig.eigenvectors)


def trace_product(A, B) -> float:
    """``Re Tr(AB)`` for Hermitian ``A``, ``B``."""
    A = as_square(A)
    B = as_square(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    # Tr(AB) = sum_ij A_ij B_ji
    tr = np.sum(A * B.T)
    if abs(tr.imag) >= 1e-10:
        raise NotHermitian(f"Tr(AB) has imaginary part {tr.imag:.3e}")
    return float(tr.real)
