"""Distance-like functions on density matrices.

Each public pair function has a batched ``*_matrix`` twin that evaluates all
``(query, site)`` pairs at once; the pair functions call the batched code
with one element per side so both paths share the same arithmetic.
Divergences are in nats.
"""
from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from qgeom import linalg
from qgeom.errors import DimensionMismatch, DomainError, NotOnSphere, NotPure, SingularSecondArgument
from qgeom.states import (
    PURE_TOL,
    BlochVector,
    DensityMatrix,
    XiVector,
    bloch_coordinates,
    xi_values,
)

CLAMP_TOL = 1e-8
FULL_RANK_TOL = 1e-12
SPHERE_TOL = 1e-9
# eigenvalues this small (relative to the largest) are numerical zeros in Tr sqrt(.)
SQRT_RANK_CUT = 1e-14


class DistanceKind(str, Enum):
    """Distance kinds usable for labelings.

    ``DIVERGENCE`` evaluates ``D(query || site)`` (cells of V_D);
    ``DIVERGENCE_DUAL`` evaluates ``D(site || query)`` (cells of V_D*).
    """

    FUBINI_STUDY = "fs"
    BURES_PURE = "bures_pure"
    BURES = "bures"
    DIVERGENCE = "div"
    DIVERGENCE_DUAL = "divdual"
    EUCLIDEAN_XI = "euclid"
    GEODESIC_SPHERE = "geodesic"

    @classmethod
    def parse(cls, name: str) -> "DistanceKind":
        aliases = {"fubini_study": "fs", "divergence": "div", "euclidean": "euclid", "euclidean_xi": "euclid"}
        name = aliases.get(name.strip().lower(), name.strip().lower())
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown distance kind {name!r} (expected one of {valid})") from None


# --- helpers -------------------------------------------------------------------

def _clamp(x: np.ndarray, lo: float, hi: float, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < lo - CLAMP_TOL) or np.any(x > hi + CLAMP_TOL):
        raise DomainError(f"{what} outside [{lo}, {hi}] by more than {CLAMP_TOL:g}")
    return np.clip(x, lo, hi)


def _same_dim(a: Sequence[DensityMatrix], b: Sequence[DensityMatrix]) -> int:
    dims = {s.dim for s in a} | {s.dim for s in b}
    if len(dims) > 1:
        raise DimensionMismatch(f"states of mixed dimensions {sorted(dims)}")
    return dims.pop() if dims else 0


def stack(states: Sequence[DensityMatrix]) -> np.ndarray:
    return np.stack([s.matrix for s in states]) if len(states) else np.empty((0, 0, 0), complex)


def stack_eigen(states: Sequence[DensityMatrix]) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues/vectors of every state, filling missing caches in one batch call."""
    missing = [s for s in states if "eig" not in s.__dict__]
    if missing:
        w, V = linalg.eigh_batch(stack(missing))
        for s, wi, Vi in zip(missing, w, V):
            s.__dict__["eig"] = linalg.EigenDecomposition(wi, Vi)
    if not states:
        return np.empty((0, 0)), np.empty((0, 0, 0), complex)
    return (
        np.stack([s.eig.eigenvalues for s in states]),
        np.stack([s.eig.eigenvectors for s in states]),
    )


def _require_pure(states: Sequence[DensityMatrix], role: str) -> None:
    for i, s in enumerate(states):
        p = float(np.sum(np.abs(s.matrix) ** 2))
        if p < 1.0 - PURE_TOL:
            raise NotPure(f"{role} {i} is not pure (purity {p:.12g})")


def neg_entropy(w: np.ndarray) -> np.ndarray:
    """``sum_i l_i log l_i`` along the last axis with ``0 log 0 = 0``."""
    w = np.asarray(w, dtype=np.float64)
    pos = w > 0
    out = np.zeros_like(w)
    out[pos] = w[pos] * np.log(w[pos])
    return out.sum(axis=-1)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return float(-neg_entropy(rho.eig.eigenvalues))


# --- batched evaluators -------------------------------------------------------

def overlap_matrix(queries: Sequence[DensityMatrix], sites: Sequence[DensityMatrix]) -> np.ndarray:
    """``Tr(q_i s_j)`` for all pairs."""
    _same_dim(queries, sites)
    Q, S = stack(queries), stack(sites)
    return np.einsum("iab,jba->ij", Q, S).real


def fubini_study_matrix(queries, sites) -> np.ndarray:
    _require_pure(queries, "query")
    _require_pure(sites, "site")
    t = _clamp(overlap_matrix(queries, sites), 0.0, 1.0, "Tr(rho sigma)")
    return np.arccos(np.sqrt(t))


def bures_pure_matrix(queries, sites) -> np.ndarray:
    _require_pure(queries, "query")
    _require_pure(sites, "site")
    t = _clamp(overlap_matrix(queries, sites), 0.0, 1.0, "Tr(rho sigma)")
    return np.sqrt(1.0 - t)


def _sqrt_spectrum(w: np.ndarray) -> np.ndarray:
    w = linalg.clamp_roundoff(w)
    if np.any(w < 0):
        raise DomainError(f"negative eigenvalue {w.min():.3e} under a square root")
    cut = SQRT_RANK_CUT * np.maximum(w.max(axis=-1, keepdims=True), 1.0)
    return np.sqrt(np.where(w <= cut, 0.0, w))


def fidelity_root_matrix(queries, sites) -> np.ndarray:
    """``Tr sqrt(sqrt(s_j) q_i sqrt(s_j))`` for all pairs."""
    d = _same_dim(queries, sites)
    wS, VS = stack_eigen(sites)
    root_s = linalg.from_eigen(_sqrt_spectrum(wS), VS)
    Q = stack(queries)
    prod = np.einsum("jab,ibc,jcd->ijad", root_s, Q, root_s, optimize=True)
    n, k = len(queries), len(sites)
    prod = 0.5 * (prod + np.swapaxes(prod.conj(), -1, -2))
    w, _ = linalg.eigh_batch(prod.reshape(n * k, d, d))
    return _sqrt_spectrum(w).sum(axis=-1).reshape(n, k)


def bures_matrix(queries, sites) -> np.ndarray:
    f = _clamp(fidelity_root_matrix(queries, sites), 0.0, 1.0, "Tr sqrt(sqrt(s) q sqrt(s))")
    return np.sqrt(1.0 - f)


def divergence_matrix(first: Sequence[DensityMatrix], second: Sequence[DensityMatrix]) -> np.ndarray:
    """``D(first_i || second_j)`` for all pairs.

    Evaluated in the eigenbases: ``sum l log l - sum_ab |<u_a|v_b>|^2 l_a log m_b``
    so no matrix log of the (possibly singular) first argument is taken.
    """
    _same_dim(first, second)
    w1, V1 = stack_eigen(first)
    w2, V2 = stack_eigen(second)
    for j, m in enumerate(w2[:, 0] if len(second) else []):
        if m <= FULL_RANK_TOL:
            raise SingularSecondArgument(
                f"second argument {j} is not full rank (min eigenvalue {m:.3e}); D is undefined"
            )
    w1 = np.where(w1 < 0, 0.0, w1)
    overlap = np.abs(np.einsum("ica,jcb->ijab", V1.conj(), V2, optimize=True)) ** 2
    cross = np.einsum("ijab,ia,jb->ij", overlap, w1, np.log(w2), optimize=True)
    return neg_entropy(w1)[:, None] - cross


def euclidean_sq_matrix(queries, sites) -> np.ndarray:
    _same_dim(queries, sites)
    a = xi_values(stack(queries))
    b = xi_values(stack(sites))
    return np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)


def geodesic_matrix(queries, sites, project_queries: bool = True) -> np.ndarray:
    """Great-circle angle between Bloch directions (d = 2 only).

    Sites must lie on the sphere. Queries are radially projected onto it
    when ``project_queries`` is set, otherwise they must lie on it too.
    """
    d = _same_dim(queries, sites)
    if d != 2:
        raise DimensionMismatch("the geodesic distance is defined on the qubit Bloch sphere")
    a = bloch_coordinates(stack(queries))
    b = bloch_coordinates(stack(sites))
    nb = np.linalg.norm(b, axis=1)
    if np.any(np.abs(nb - 1.0) > SPHERE_TOL):
        raise NotOnSphere("geodesic labeling needs pure (unit Bloch vector) sites")
    na = np.linalg.norm(a, axis=1)
    if project_queries:
        if np.any(na < 1e-12):
            raise DomainError("cannot project the centre of the Bloch ball onto the sphere")
        a = a / na[:, None]
    elif np.any(np.abs(na - 1.0) > SPHERE_TOL):
        raise NotOnSphere("query is not on the Bloch sphere")
    return np.arccos(np.clip(a @ b.T, -1.0, 1.0))


def distance_matrix(queries, sites, kind: DistanceKind) -> np.ndarray:
    """Distance from each query to each site under ``kind`` (shape ``(n, k)``)."""
    kind = DistanceKind(kind)
    if kind is DistanceKind.FUBINI_STUDY:
        return fubini_study_matrix(queries, sites)
    if kind is DistanceKind.BURES_PURE:
        return bures_pure_matrix(queries, sites)
    if kind is DistanceKind.BURES:
        return bures_matrix(queries, sites)
    if kind is DistanceKind.DIVERGENCE:
        return divergence_matrix(queries, sites)
    if kind is DistanceKind.DIVERGENCE_DUAL:
        return divergence_matrix(sites, queries).T
    if kind is DistanceKind.EUCLIDEAN_XI:
        return euclidean_sq_matrix(queries, sites)
    if kind is DistanceKind.GEODESIC_SPHERE:
        return geodesic_matrix(queries, sites)
    raise ValueError(kind)


# --- pair functions --------------------------------------------------------------

def fubini_study(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``arccos sqrt(Tr rho sigma)`` in radians, for pure states."""
    return float(fubini_study_matrix([rho], [sigma])[0, 0])


def bures_pure(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``sqrt(1 - Tr rho sigma)`` for pure states."""
    return float(bures_pure_matrix([rho], [sigma])[0, 0])


def bures(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``sqrt(1 - Tr sqrt(sqrt(sigma) rho sqrt(sigma)))`` for arbitrary states.

    For pure states the trace term equals ``sqrt(Tr rho sigma)``, so this is
    not numerically equal to :func:`bures_pure`; both decrease in ``Tr rho sigma``.
    """
    return float(bures_matrix([rho], [sigma])[0, 0])


def divergence(sigma: DensityMatrix, rho: DensityMatrix) -> float:
    """``D(sigma || rho) = Tr sigma (log sigma - log rho)`` in nats.

    ``sigma`` may be singular (``0 log 0 = 0``); ``rho`` must be full rank.
    """
    return float(divergence_matrix([sigma], [rho])[0, 0])


def euclidean_sq(a: XiVector, b: XiVector) -> float:
    if a.dim != b.dim:
        raise DimensionMismatch(f"xi vectors of dimension {a.dim} and {b.dim}")
    diff = a.values - b.values
    return float(diff @ diff)


def geodesic_sphere(a: BlochVector, b: BlochVector) -> float:
    va, vb = a.as_array(), b.as_array()
    for v in (va, vb):
        if abs(np.linalg.norm(v) - 1.0) > SPHERE_TOL:
            raise NotOnSphere(f"vector {v.tolist()} is not on the unit sphere")
    return float(np.arccos(np.clip(va @ vb, -1.0, 1.0)))
