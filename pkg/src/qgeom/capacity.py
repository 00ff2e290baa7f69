"""Qubit channels and Holevo capacity as a smallest enclosing divergence ball.

The estimator samples input pure states on a Fibonacci lattice, maps them
through the channel and finds the state ``sigma`` minimising
``max_i D(p_i || sigma)``. The minimax value is the capacity of the
discretised channel. Two independent solvers are provided:

* :func:`estimate_capacity_seb` moves the center towards the current
  farthest image point with step ``1/(k+2)``.
* :func:`estimate_capacity_ba` runs Blahut-Arimoto weight updates on the
  same points.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.optimize import nnls

from qgeom import linalg
from qgeom._backend import kernels
from qgeom.distances import divergence_matrix, neg_entropy, stack, stack_eigen
from qgeom.errors import (
    DidNotConverge,
    DimensionMismatch,
    NotCompletelyPositive,
    NotTracePreserving,
    RangeError,
)
from qgeom.states import (
    DensityMatrix,
    bloch_coordinates,
    bloch_matrix,
    bloch_to_density,
    density_to_bloch,
    xi_values,
)
from qgeom.voronoi import fibonacci_points

CHOI_TOL = 1e-9
TP_TOL = 1e-9
RANK_FLOOR = 1e-12
SUPPORT_MIN_WEIGHT = 1e-6
# the certificate ensemble is drawn from points within SUPPORT_SLACK * tol of the radius
SUPPORT_SLACK = 10.0

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=np.complex128
)


@dataclass(frozen=True, eq=False)
class QubitChannel:
    """Affine action ``b -> M b + t`` on Bloch vectors; validated completely positive."""

    M: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=np.float64)
        t = np.array(self.t, dtype=np.float64)
        if M.shape != (3, 3) or t.shape != (3,):
            raise DimensionMismatch("affine channel needs a 3x3 matrix M and a 3-vector t")
        M.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "t", t)
        lam = float(linalg.eigh_batch(choi_matrix(self)[None])[0][0, 0])
        if lam < -CHOI_TOL:
            raise NotCompletelyPositive(lam)

    def map_bloch(self, b) -> np.ndarray:
        return np.asarray(b, dtype=np.float64) @ self.M.T + self.t

    def map_operator(self, X) -> np.ndarray:
        """Linear extension to arbitrary 2x2 operators."""
        X = np.asarray(X, dtype=np.complex128)
        tr = np.trace(X)
        p = np.einsum("kab,ba->k", PAULI, X)
        out = tr * (np.eye(2) + np.einsum("j,jab->ab", self.t, PAULI))
        out = out + np.einsum("jk,k,jab->ab", self.M, p, PAULI)
        return 0.5 * out


def channel_from_affine(M, t) -> QubitChannel:
    return QubitChannel(M, t)


def identity_channel() -> QubitChannel:
    return QubitChannel(np.eye(3), np.zeros(3))


def depolarizing_channel(r: float) -> QubitChannel:
    """Bloch ball shrunk by ``r``; ``r = 0`` is the fully depolarising channel."""
    return QubitChannel(r * np.eye(3), np.zeros(3))


def choi_matrix(ch: QubitChannel) -> np.ndarray:
    """``sum_ab |a><b| (x) ch(|a><b|)`` (4x4); PSD iff the channel is completely positive."""
    C = np.zeros((4, 4), dtype=np.complex128)
    for a in range(2):
        for b in range(2):
            E = np.zeros((2, 2), dtype=np.complex128)
            E[a, b] = 1.0
            C[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = ch.map_operator(E)
    return C


def channel_from_kraus(kraus: Sequence) -> QubitChannel:
    Ks = [np.asarray(K, dtype=np.complex128) for K in kraus]
    if not Ks or any(K.shape != (2, 2) for K in Ks):
        raise DimensionMismatch("Kraus operators must be 2x2")
    tp = sum(K.conj().T @ K for K in Ks)
    err = float(np.max(np.abs(tp - np.eye(2))))
    if err > TP_TOL:
        raise NotTracePreserving(f"sum K^dagger K deviates from I by {err:.3e}")

    def act(X):
        return sum(K @ X @ K.conj().T for K in Ks)

    t = 0.5 * np.array([np.trace(P @ act(np.eye(2))).real for P in PAULI])
    M = 0.5 * np.array([[np.trace(Pj @ act(Pk)).real for Pk in PAULI] for Pj in PAULI])
    return QubitChannel(M, t)


def rotation_from_unitary(U) -> np.ndarray:
    """Orthogonal 3x3 matrix ``R`` with ``U (b.sigma) U^dagger = (R b).sigma``."""
    U = np.asarray(U, dtype=np.complex128)
    return 0.5 * np.array(
        [[np.trace(Pj @ U @ Pk @ U.conj().T).real for Pk in PAULI] for Pj in PAULI]
    )


def conjugate_channel(ch: QubitChannel, U_out, U_in=None) -> QubitChannel:
    """``rho -> U_out ch(U_in rho U_in^dagger) U_out^dagger``."""
    R_out = rotation_from_unitary(U_out)
    R_in = np.eye(3) if U_in is None else rotation_from_unitary(U_in)
    return QubitChannel(R_out @ ch.M @ R_in, R_out @ ch.t)


def apply(ch: QubitChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != 2:
        raise DimensionMismatch(f"qubit channel applied to a d={rho.dim} state")
    return bloch_to_density(ch.map_bloch(density_to_bloch(rho).as_array()))


def image_states(ch: QubitChannel, bloch_vectors: np.ndarray) -> list[DensityMatrix]:
    v = ch.map_bloch(bloch_vectors)
    mats = np.moveaxis(bloch_matrix(v[:, 0], v[:, 1], v[:, 2]), -1, 0)
    return [DensityMatrix(m) for m in mats]


def image_divergence(ch: QubitChannel, sigma: DensityMatrix, rho: DensityMatrix) -> float:
    """``D(ch(sigma) || ch(rho))``, the integrand of the inf-sup capacity formula taken literally."""
    return float(divergence_matrix([apply(ch, sigma)], [apply(ch, rho)])[0, 0])


# --- estimates ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CapacityEstimate:
    """Result of a minimax-center solve.

    ``support_weights`` is an input ensemble on the farthest points (those
    within ``10 * tol`` of the radius) whose mixture best reproduces the
    center; ``hull_residual`` is the Frobenius error of that mixture.
    ``mixture_weights`` are the solver's own iterate weights.
    """

    radius_nats: float
    center: DensityMatrix
    support_weights: np.ndarray
    iterations: int
    residual: float
    divergences: np.ndarray = field(repr=False)
    mixture_weights: np.ndarray = field(repr=False, default=None)
    hull_residual: float = 0.0
    converged: bool = True
    method: str = "seb"

    @property
    def radius_bits(self) -> float:
        return self.radius_nats / math.log(2.0)

    @property
    def n_points(self) -> int:
        return len(self.support_weights)

    def support(self, min_weight: float = SUPPORT_MIN_WEIGHT) -> list[dict[str, float]]:
        idx = np.flatnonzero(self.support_weights > min_weight)
        return [
            {"index": int(i), "weight": float(self.support_weights[i]), "divergence": float(self.divergences[i])}
            for i in idx
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "radius_nats": self.radius_nats,
            "radius_bits": self.radius_bits,
            "center_bloch": [float(c) for c in bloch_coordinates(self.center.matrix)]
            if self.center.dim == 2
            else None,
            "n_points": self.n_points,
            "iterations": self.iterations,
            "residual": self.residual,
            "hull_residual": self.hull_residual,
            "support": self.support(),
        }


def estimate_json(est: CapacityEstimate, metadata: Mapping[str, object] | None = None) -> str:
    payload = est.to_dict()
    if metadata:
        payload["metadata"] = dict(metadata)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def divergence_radius(points: Sequence[DensityMatrix], center: DensityMatrix) -> tuple[float, int]:
    """``max_i D(p_i || center)`` and the first index attaining it."""
    D = divergence_matrix(list(points), [center])[:, 0]
    i = int(np.argmax(D))
    return float(D[i]), i


def holevo_quantity(points: Sequence[DensityMatrix], weights) -> float:
    """``S(sum_i w_i p_i) - sum_i w_i S(p_i)`` in nats."""
    w = np.asarray(weights, dtype=np.float64)
    lam, _ = stack_eigen(points)
    avg = np.einsum("i,iab->ab", w, stack(points))
    avg_lam = linalg.clamp_roundoff(linalg.hermitian_eigen(avg).eigenvalues)
    return float(-neg_entropy(avg_lam) + w @ neg_entropy(np.clip(lam, 0.0, None)))


def support_ensemble(points: Sequence[DensityMatrix], center: np.ndarray, divergences: np.ndarray,
                     slack: float) -> tuple[np.ndarray, float]:
    """Nonnegative weights on ``{i : D_i >= max D - slack}`` with ``sum w_i p_i`` closest to ``center``.

    At the exact minimax center the center is such a mixture, so a small
    residual certifies the enclosing ball.
    """
    D = np.asarray(divergences)
    active = np.flatnonzero(D >= D.max() - slack)
    P = stack([points[i] for i in active])
    # trace is fixed by the sum-to-one row, so xi coordinates describe the rest
    A = np.vstack([xi_values(P).T, 10.0 * np.ones(len(active))])
    b = np.concatenate([xi_values(center), [10.0]])
    w_active, _ = nnls(A, b)
    w = np.zeros(len(D))
    if w_active.sum() > 0:
        w[active] = w_active / w_active.sum()
    mix = np.einsum("i,iab->ab", w[active], P)
    return w, float(np.linalg.norm(mix - center))


def _run(solver, points: Sequence[DensityMatrix], max_iter: int, tol: float, method: str) -> CapacityEstimate:
    if len(points) < 2:
        raise RangeError("need at least two points")
    if max_iter < 0 or tol <= 0:
        raise RangeError("max_iter must be >= 0 and tol > 0")
    lam, _ = stack_eigen(points)
    P = stack(points)
    w, center, k, upper, lower, converged, D = solver(
        P, neg_entropy(np.clip(lam, 0.0, None)), int(max_iter), float(tol), RANK_FLOOR
    )
    center = 0.5 * (center + center.conj().T)
    center = center / np.trace(center).real
    radius = upper if method == "seb" else lower
    support, hull = support_ensemble(points, center, D, SUPPORT_SLACK * tol)
    est = CapacityEstimate(
        radius_nats=max(float(radius), 0.0),
        center=DensityMatrix(center),
        support_weights=support,
        iterations=int(k),
        residual=float(max(upper - lower, 0.0)),
        divergences=np.asarray(D),
        mixture_weights=np.asarray(w),
        hull_residual=hull,
        converged=bool(converged),
        method=method,
    )
    if not converged:
        raise DidNotConverge(
            f"{method} gap {upper - lower:.3e} above tol {tol:g} after {k} iterations", best=est
        )
    return est


def minimax_center(points: Sequence[DensityMatrix], max_iter: int = 100_000, tol: float = 1e-5) -> CapacityEstimate:
    """Smallest enclosing divergence ball of arbitrary points (any dimension)."""
    return _run(kernels.seb_frank_wolfe, list(points), max_iter, tol, "seb")


def estimate_capacity_seb(
    ch: QubitChannel, n_points: int = 1000, max_iter: int = 100_000, tol: float = 1e-5
) -> CapacityEstimate:
    """Sample the input sphere, map it through ``ch`` and enclose the image.

    ``radius_nats`` is the largest divergence from the returned center, so it
    bounds the discretised capacity from above; ``residual`` is the distance
    to the best Holevo lower bound seen.
    """
    if n_points < 2:
        raise RangeError("need at least two sample points")
    return minimax_center(image_states(ch, fibonacci_points(n_points)), max_iter, tol)


def estimate_capacity_ba(
    points: Sequence[DensityMatrix], max_iter: int = 1_000_000, tol: float = 1e-5
) -> CapacityEstimate:
    """Blahut-Arimoto on a finite point set; ``radius_nats`` is the Holevo quantity reached."""
    return _run(kernels.blahut_arimoto, list(points), max_iter, tol, "ba")


def analytic_depolarizing_capacity(r: float) -> float:
    """``log 2 - h((1 + r)/2)`` nats for the channel ``b -> r b``."""
    p = (1.0 + abs(r)) / 2.0
    h = -sum(q * math.log(q) for q in (p, 1.0 - p) if q > 0)
    return math.log(2.0) - h


def parse_channel(obj: Mapping[str, Any]) -> QubitChannel:
    """``{"affine": {"M": ..., "t": ...}}`` or ``{"kraus": [K1, K2, ...]}`` with complex
    entries written as ``[re, im]`` pairs."""
    if "affine" in obj:
        aff = obj["affine"]
        return channel_from_affine(np.asarray(aff["M"], float), np.asarray(aff["t"], float))
    if "kraus" in obj:
        ks = []
        for K in obj["kraus"]:
            arr = np.asarray(K, dtype=np.float64)
            if arr.shape != (2, 2, 2):
                raise DimensionMismatch("each Kraus operator is a 2x2 matrix of [re, im] pairs")
            ks.append(arr[..., 0] + 1j * arr[..., 1])
        return channel_from_kraus(ks)
    raise ValueError("channel file needs an 'affine' or 'kraus' entry")
