"""Bisectors in the (d+1)-dimensional xi-section of a d-level state space (d >= 3).

The section keeps xi_1..xi_{d+1} and sets every later coordinate to zero,
so a section matrix is diagonal apart from the (1,2) entry
``(xi_d - i xi_{d+1})/2``. Its pure states supported on the first two basis
vectors satisfy ``xi_2 = d - 2 - xi_1`` and ``xi_i = -1`` for ``3 <= i <= d-1``
and lie on the ellipsoid

    4 (xi_1 - (d-2)/2)^2 / d^2 + xi_d^2 + xi_{d+1}^2 = 1.

A point of that three-dimensional slice is described by a :class:`SectionSite`
``(xi_1, xi_d, xi_{d+1})``. Rescaling the first coordinate,
``z = 2 (xi_1 - (d-2)/2) / d``, turns the slice into the Bloch ball of the
embedded qubit and the ellipsoid into the unit sphere.

The two closed-form bisector residuals below are only valid on this slice.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qgeom.distances import DistanceKind, distance_matrix
from qgeom.errors import DimensionMismatch, DomainError, RangeError
from qgeom.states import PURE_TOL, DensityMatrix, XiVector, purity, shrink_toward_center, xi_to_matrix, xi_values
from qgeom.voronoi import (
    DEFAULT_BAND,
    DEFAULT_R_SEQUENCE,
    AgreementReport,
    Labeling,
    _rank,
    label_samples,
    labelings_agree,
)

SECTION_ATOL = 1e-12


def _check_dim(d: int) -> None:
    if d < 3:
        raise DimensionMismatch(f"the section analysis needs d >= 3, got d={d}")


@dataclass(frozen=True)
class SectionSite:
    """Point ``(xi_1, xi_d, xi_{d+1})`` of the unit-trace-block slice."""

    d: int
    xi1: float
    xid: float
    xid1: float

    def __post_init__(self):
        _check_dim(self.d)

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.xi1, self.xid, self.xid1])

    def xi(self) -> XiVector:
        d = self.d
        diag = [self.xi1, d - 2 - self.xi1] + [-1.0] * (d - 3)
        return section_embed(d, diag, self.xid, self.xid1)

    def matrix(self) -> np.ndarray:
        return xi_to_matrix(self.xi())

    def state(self) -> DensityMatrix:
        return DensityMatrix(self.matrix())

    def sphere_point(self) -> np.ndarray:
        """Image under the rescaling that maps the pure-state ellipsoid to the unit sphere."""
        return np.array([self.xid, self.xid1, 2.0 * (self.xi1 - (self.d - 2) / 2.0) / self.d])

    @classmethod
    def from_sphere_point(cls, d: int, v) -> "SectionSite":
        x, y, z = (float(c) for c in v)
        return cls(d, (d - 2) / 2.0 + d * z / 2.0, x, y)


def section_embed(d: int, diagonal: Sequence[float], xi_d: float, xi_d1: float) -> XiVector:
    """Full xi vector with ``xi_1..xi_{d-1} = diagonal``, the given (1,2) pair and zeros after."""
    _check_dim(d)
    diagonal = np.asarray(diagonal, dtype=np.float64)
    if diagonal.shape != (d - 1,):
        raise DimensionMismatch(f"need {d - 1} diagonal coordinates, got {diagonal.shape}")
    v = np.zeros(d * d - 1)
    v[: d - 1] = diagonal
    v[d - 1] = xi_d
    v[d] = xi_d1
    return XiVector(d, v)


def in_section(A, atol: float = SECTION_ATOL) -> bool:
    A = np.asarray(A)
    mask = np.ones(A.shape, dtype=bool)
    np.fill_diagonal(mask, False)
    mask[0, 1] = mask[1, 0] = False
    return bool(np.all(np.abs(A[mask]) <= atol))


def section_coordinates(sigma: DensityMatrix) -> SectionSite:
    """Slice coordinates of a section state's normalised (1,2) block.

    Comparisons of ``Tr sigma rho`` (and of either divergence) against states
    supported on the block depend on ``sigma`` only through this block, up to
    a positive factor, so the slice residuals apply to any section state.
    """
    d = sigma.dim
    _check_dim(d)
    if not in_section(sigma.matrix):
        raise DomainError("state has entries outside the section pattern")
    B = sigma.matrix[:2, :2]
    s = float(np.trace(B).real)
    if s <= SECTION_ATOL:
        raise DomainError("state has no weight on the (1,2) block")
    B = B / s
    z = float((B[0, 0] - B[1, 1]).real)
    return SectionSite.from_sphere_point(d, (2 * B[0, 1].real, -2 * B[0, 1].imag, z))


# --- closed-form bisectors ------------------------------------------------------

def _triple(p, d: int) -> np.ndarray:
    if isinstance(p, SectionSite):
        if p.d != d:
            raise DimensionMismatch(f"section point for d={p.d} used with d={d}")
        return p.coords
    v = np.asarray(p, dtype=np.float64)
    if v.shape != (3,):
        raise DimensionMismatch("section coordinates are (xi_1, xi_d, xi_{d+1})")
    return v


def divergence_bisector_coefficients(eta, eta_t, d: int) -> np.ndarray:
    """Coefficients of ``(xi_1, xi_d, xi_{d+1})`` in :func:`boundary_residual_divergence`."""
    _check_dim(d)
    a, b = _triple(eta, d), _triple(eta_t, d)
    return np.array([4.0 * (a[0] - b[0]) / d**2, a[1] - b[1], a[2] - b[2]])


def euclidean_bisector_coefficients(eta, eta_t, d: int) -> np.ndarray:
    """Coefficients of ``(xi_1, xi_d, xi_{d+1})`` in :func:`boundary_residual_euclidean`."""
    _check_dim(d)
    a, b = _triple(eta, d), _triple(eta_t, d)
    return np.array([-4.0 * (a[0] - b[0]), -2.0 * (a[1] - b[1]), -2.0 * (a[2] - b[2])])


def boundary_residual_divergence(eta, eta_t, xi, d: int) -> float:
    """``(eta_d - et_d) xi_d + (eta_{d+1} - et_{d+1}) xi_{d+1} + 4 (eta_1 - et_1)(xi_1 - (d-2)/2)/d^2``.

    Positive when the query is closer (in divergence) to ``eta`` than to ``eta_t``.
    """
    a, b, x = _triple(eta, d), _triple(eta_t, d), _triple(xi, d)
    return float(
        (a[1] - b[1]) * x[1]
        + (a[2] - b[2]) * x[2]
        + 4.0 * (a[0] - b[0]) * (x[0] - (d - 2) / 2.0) / d**2
    )


def boundary_residual_euclidean(eta, eta_t, xi, d: int) -> float:
    """Squared xi-distance to ``eta`` minus squared xi-distance to ``eta_t``.

    Closed form on the slice, where ``(eta_2 - xi_2)^2 = (eta_1 - xi_1)^2``.
    Positive when the query is closer to ``eta_t``.
    """
    _check_dim(d)
    a, b, x = _triple(eta, d), _triple(eta_t, d), _triple(xi, d)
    return float(
        -4.0 * (a[0] - b[0]) * x[0]
        - 2.0 * (a[1] - b[1]) * x[1]
        - 2.0 * (a[2] - b[2]) * x[2]
        + 2.0 * (a[0] ** 2 - b[0] ** 2)
        + (a[1] ** 2 - b[1] ** 2)
        + (a[2] ** 2 - b[2] ** 2)
    )


def coefficient_cross(u, v) -> float:
    """Norm of the cross product; zero iff the two bisector normals are parallel."""
    return float(np.linalg.norm(np.cross(np.asarray(u, float), np.asarray(v, float))))


# --- sampling --------------------------------------------------------------------

def sample_section_ellipsoid(n: int, d: int, seed: int) -> list[SectionSite]:
    """``n`` pure section states ``psi = (cos t/2, e^{i phi} sin t/2, 0, ...)``, uniform on the ellipsoid."""
    _check_dim(d)
    rng = np.random.default_rng(seed)
    out: list[SectionSite] = []
    while len(out) < n:
        cos_t = rng.uniform(-1.0, 1.0)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        psi = np.zeros(d, dtype=np.complex128)
        psi[0] = np.sqrt((1.0 + cos_t) / 2.0)
        psi[1] = np.exp(1j * phi) * np.sqrt((1.0 - cos_t) / 2.0)
        rho = np.outer(psi, psi.conj())
        if np.sum(np.abs(rho) ** 2) < 1.0 - PURE_TOL:
            continue
        xi = xi_values(rho)
        out.append(SectionSite(d, float(xi[0]), float(xi[d - 1]), float(xi[d])))
    return out


def section_query_grid(d: int, n: int, extent: float = 0.65, y: float = 0.1, block_weight: float = 0.8):
    """``n x n`` full-rank section states.

    The (1,2) block carries weight ``block_weight`` and Bloch vector
    ``(x, y, z)`` with ``x, z`` on a uniform grid in ``[-extent, extent]``;
    the remaining weight is spread evenly over the other diagonal entries.
    """
    _check_dim(d)
    if 2 * extent**2 + y**2 >= 1.0:
        raise RangeError("grid leaves the Bloch ball")
    if not 0.0 < block_weight < 1.0:
        raise RangeError("block_weight must lie in (0, 1)")
    ticks = np.linspace(-extent, extent, n)
    rest = (1.0 - block_weight) / (d - 2)
    states = []
    for x in ticks:
        for z in ticks:
            A = np.diag(np.full(d, rest)).astype(np.complex128)
            A[:2, :2] = 0.5 * block_weight * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
            states.append(DensityMatrix(A))
    return states


# --- labelings on the slice --------------------------------------------------------

def site_states(points: Sequence[SectionSite]) -> list[DensityMatrix]:
    return [p.state() for p in points]


def geodesic_rescaled_labeling(
    samples: Sequence[SectionSite], sites: Sequence[SectionSite], eps_band: float = DEFAULT_BAND
) -> Labeling:
    """Nearest site by great-circle angle after mapping the ellipsoid to the unit sphere."""
    a = np.array([s.sphere_point() for s in samples])
    b = np.array([s.sphere_point() for s in sites])
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    dist = np.arccos(np.clip(a @ b.T, -1.0, 1.0))
    idx, margin = _rank(dist, "nearest")
    return Labeling(idx, margin, margin < eps_band, DistanceKind.GEODESIC_SPHERE, "nearest", eps_band)


def ellipsoid_sphere_check(
    sites: Sequence[SectionSite],
    samples: Sequence[SectionSite],
    eps_band: float = DEFAULT_BAND,
    r_sequence: Sequence[float] = DEFAULT_R_SEQUENCE,
) -> AgreementReport:
    """Divergence labeling (pure-site limit) versus geodesic labeling on the rescaled sphere."""
    div = label_samples(site_states(samples), site_states(sites), DistanceKind.DIVERGENCE,
                        eps_band=eps_band, r_sequence=r_sequence)
    geo = geodesic_rescaled_labeling(samples, sites, eps_band)
    return labelings_agree(div, geo)


def noncoincidence_witnesses(
    div: Labeling, euclid: Labeling, min_margin: float = 1e-3
) -> np.ndarray:
    """Sample indices where both labelings are confident (margin > ``min_margin``) yet disagree."""
    ok = (div.margins > min_margin) & (euclid.margins > min_margin)
    return np.flatnonzero(ok & (div.assignments != euclid.assignments))


def divergence_difference(query: DensityMatrix, eta: SectionSite, eta_t: SectionSite,
                          r: float = 0.9999, dual: bool = False) -> float:
    """``D(query || rho_t) - D(query || rho)`` with sites mixed at radius ``r``,
    or ``D(rho_t || query) - D(rho || query)`` with exact pure sites when ``dual``.

    Positive when the query is closer to ``eta``, matching the sign of
    :func:`boundary_residual_divergence`.
    """
    a, b = eta.state(), eta_t.state()
    if dual:
        D = distance_matrix([query], [a, b], DistanceKind.DIVERGENCE_DUAL)[0]
    else:
        D = distance_matrix([query], [shrink_toward_center(a, r), shrink_toward_center(b, r)],
                            DistanceKind.DIVERGENCE)[0]
    return float(D[1] - D[0])


def is_pure_section_site(p: SectionSite) -> bool:
    return purity(DensityMatrix(p.matrix())) >= 1.0 - PURE_TOL
