"""Density matrices and their Bloch / generalised-Bloch (xi) coordinates.

xi layout for a d-level system (1-based names, 0-based storage)::

    xi_1 .. xi_{d-1}        diagonal:  rho_ii = (xi_i + 1)/d,  rho_dd = (1 - sum xi_i)/d
    xi_d, xi_{d+1}          entry (1,2) = (xi_d - i xi_{d+1})/2
    xi_{d+2}, xi_{d+3}      entry (1,3)
    ...                     remaining upper-triangle entries in row-major order

At d = 2 this gives (x, y, z) = (xi_2, xi_3, xi_1).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Sequence

import numpy as np

from qgeom import linalg
from qgeom.errors import (
    DimensionMismatch,
    InvalidState,
    NotHermitian,
    OutsideBall,
    RangeError,
    TraceNotOne,
)

TRACE_ATOL = 1e-10
PSD_TOL = 1e-10
PURE_TOL = 1e-9
BALL_TOL = 1e-10


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm_sq() > 1.0 + BALL_TOL:
            raise OutsideBall(f"Bloch vector norm {np.sqrt(self.norm_sq()):.12g} exceeds 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def norm_sq(self) -> float:
        return float(self.x * self.x + self.y * self.y + self.z * self.z)

    @classmethod
    def from_array(cls, v) -> "BlochVector":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)


@dataclass(frozen=True, eq=False)
class XiVector:
    dim: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.dim * self.dim - 1,):
            raise DimensionMismatch(
                f"xi vector for d={self.dim} needs {self.dim * self.dim - 1} values, got {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    def __getitem__(self, i: int) -> float:
        """1-based access, ``xi[1]`` is the first coordinate."""
        return float(self.values[i - 1])


@dataclass(frozen=True)
class ValidityReport:
    hermitian: bool
    unit_trace: bool
    psd: bool
    min_eigenvalue: float

    @property
    def valid(self) -> bool:
        return self.hermitian and self.unit_trace and self.psd


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix. The eigendecomposition is cached."""

    matrix: np.ndarray

    def __post_init__(self):
        A = linalg.as_square(self.matrix)
        err = linalg.hermitian_error(A)
        if err > linalg.HERMITIAN_ATOL:
            raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e}")
        A = 0.5 * (A + A.conj().T)
        tr = np.trace(A).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise TraceNotOne(f"trace is {tr:.15g}")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        lam = self.eig.eigenvalues[0]
        if lam < -PSD_TOL:
            raise InvalidState(f"matrix is not positive semidefinite (min eigenvalue {lam:.3e})")

    @classmethod
    def _trusted(cls, matrix: np.ndarray, eig: linalg.EigenDecomposition | None = None):
        obj = object.__new__(cls)
        A = np.array(matrix, dtype=np.complex128)
        A.setflags(write=False)
        object.__setattr__(obj, "matrix", A)
        if eig is not None:
            obj.__dict__["eig"] = eig
        return obj

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eig(self) -> linalg.EigenDecomposition:
        w, V = linalg.eigh_batch(self.matrix[None])
        return linalg.EigenDecomposition(w[0], V[0])

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eig.eigenvalues[0])

    def is_full_rank(self, tol: float = 1e-12) -> bool:
        return self.min_eigenvalue > tol

    def __repr__(self) -> str:
        return f"DensityMatrix(d={self.dim}, purity={purity(self):.6g})"


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix._trusted(
        np.eye(d, dtype=np.complex128) / d,
        linalg.EigenDecomposition(np.full(d, 1.0 / d), np.eye(d, dtype=np.complex128)),
    )


def check_state(H, tol: float = PSD_TOL) -> ValidityReport:
    A = linalg.as_square(H)
    herm = linalg.hermitian_error(A) <= linalg.HERMITIAN_ATOL
    tr_ok = abs(np.trace(A).real - 1.0) <= TRACE_ATOL and abs(np.trace(A).imag) <= TRACE_ATOL
    w, _ = linalg.eigh_batch((0.5 * (A + A.conj().T))[None])
    lam = float(w[0, 0])
    return ValidityReport(bool(herm), bool(tr_ok), lam >= -tol, lam)


# --- Bloch ball (d = 2) ---------------------------------------------------

def bloch_matrix(x: float, y: float, z: float) -> np.ndarray:
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=np.complex128)


def bloch_to_density(b) -> DensityMatrix:
    if not isinstance(b, BlochVector):
        b = BlochVector.from_array(b)
    return DensityMatrix(bloch_matrix(b.x, b.y, b.z))


def bloch_coordinates(A) -> np.ndarray:
    """(x, y, z) of a 2x2 Hermitian matrix, or of an ``(n, 2, 2)`` stack."""
    A = np.asarray(A)
    return np.stack(
        [2 * A[..., 0, 1].real, -2 * A[..., 0, 1].imag, (A[..., 0, 0] - A[..., 1, 1]).real],
        axis=-1,
    )


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise DimensionMismatch(f"Bloch vectors exist only for d=2, got d={rho.dim}")
    return BlochVector.from_array(bloch_coordinates(rho.matrix))


# --- generalised Bloch coordinates ------------------------------------------

@lru_cache(maxsize=None)
def offdiag_layout(d: int) -> tuple[tuple[int, int], ...]:
    """Upper-triangle entries (0-based) in xi order; pair k uses xi_{d+2k}, xi_{d+2k+1}."""
    return tuple((j, k) for j in range(d) for k in range(j + 1, d))


def xi_to_matrix(xi: XiVector) -> np.ndarray:
    d = xi.dim
    v = xi.values
    A = np.zeros((d, d), dtype=np.complex128)
    diag = v[: d - 1]
    A[np.arange(d - 1), np.arange(d - 1)] = (diag + 1.0) / d
    A[d - 1, d - 1] = (1.0 - diag.sum()) / d
    off = v[d - 1 :]
    for n, (j, k) in enumerate(offdiag_layout(d)):
        A[j, k] = 0.5 * (off[2 * n] - 1j * off[2 * n + 1])
        A[k, j] = 0.5 * (off[2 * n] + 1j * off[2 * n + 1])
    return A


def xi_values(A) -> np.ndarray:
    """xi coordinates of a trace-one Hermitian matrix or an ``(n, d, d)`` stack (no checks)."""
    A = np.asarray(A)
    d = A.shape[-1]
    idx = np.arange(d - 1)
    diag = d * A[..., idx, idx].real - 1.0
    layout = offdiag_layout(d)
    if layout:
        j, k = np.array(layout).T
        ent = A[..., j, k]
        off = np.stack([2 * ent.real, -2 * ent.imag], axis=-1).reshape(*A.shape[:-2], -1)
    else:
        off = np.zeros(A.shape[:-2] + (0,))
    return np.concatenate([diag, off], axis=-1)


def matrix_to_xi(H) -> XiVector:
    A = linalg.check_hermitian(H)
    tr = np.trace(A).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise TraceNotOne(f"trace is {tr:.15g}")
    return XiVector(A.shape[0], xi_values(A))


# --- purity and radial shrinking --------------------------------------------

def purity(rho: DensityMatrix) -> float:
    """``Tr rho^2``."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def is_pure(rho: DensityMatrix, tol: float = PURE_TOL) -> bool:
    return purity(rho) >= 1.0 - tol


def shrink_toward_center(rho: DensityMatrix, r: float) -> DensityMatrix:
    """``r rho + (1 - r) I/d``; at d = 2 this scales the Bloch vector by ``r``.

    The result shares ``rho``'s eigenvectors, so its spectrum is carried over
    exactly instead of being recomputed.
    """
    if not 0.0 <= r <= 1.0:
        raise RangeError(f"shrink factor must lie in [0, 1], got {r}")
    d = rho.dim
    A = r * rho.matrix + (1.0 - r) * np.eye(d) / d
    eig = linalg.EigenDecomposition(r * rho.eig.eigenvalues + (1.0 - r) / d, rho.eig.eigenvectors)
    return DensityMatrix._trusted(A, eig)


# --- random states -----------------------------------------------------------

def random_pure_matrices(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random pure states as an ``(n, d, d)`` stack."""
    psi = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    return psi[:, :, None] * psi.conj()[:, None, :]


def random_pure_states(n: int, d: int, rng: np.random.Generator) -> list[DensityMatrix]:
    return [DensityMatrix._trusted(m) for m in random_pure_matrices(n, d, rng)]


# --- state literal format ----------------------------------------------------

def _complex_matrix(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidState(f"malformed complex matrix literal: {exc}") from None
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise InvalidState("complex matrix literal must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_state(obj: dict[str, Any]) -> DensityMatrix:
    """Parse ``{"bloch": [x,y,z]}``, ``{"xi": {"d": d, "values": [...]}}`` or
    ``{"matrix": [[[re, im], ...], ...]}``."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InvalidState(f"state literal must have exactly one key, got {obj!r}")
    (key, val), = obj.items()
    if key == "bloch":
        if len(val) != 3:
            raise InvalidState("bloch literal needs three coordinates")
        return bloch_to_density(val)
    if key == "xi":
        xi = XiVector(int(val["d"]), np.asarray(val["values"], dtype=np.float64))
        return DensityMatrix(xi_to_matrix(xi))
    if key == "matrix":
        return DensityMatrix(_complex_matrix(val))
    raise InvalidState(f"unknown state literal key {key!r}")


def state_literal(rho: DensityMatrix) -> dict[str, Any]:
    if rho.dim == 2:
        return {"bloch": [float(c) for c in bloch_coordinates(rho.matrix)]}
    return {"xi": {"d": rho.dim, "values": [float(c) for c in xi_values(rho.matrix)]}}


def parse_states(items: Sequence[dict[str, Any]]) -> list[DensityMatrix]:
    return [parse_state(it) for it in items]
