import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgeom import section as X
from qgeom.distances import DistanceKind as K
from qgeom.errors import DimensionMismatch, DomainError
from qgeom.states import DensityMatrix, maximally_mixed, xi_to_matrix
from qgeom.voronoi import label_samples, labelings_agree

seeds = st.integers(0, 2**32 - 1)


def test_embed_zero_is_maximally_mixed():
    for d in (3, 4, 5):
        M = xi_to_matrix(X.section_embed(d, np.zeros(d - 1), 0, 0))
        np.testing.assert_allclose(M, np.eye(d) / d, atol=1e-15)


def test_embed_diagonal_example():
    M = xi_to_matrix(X.section_embed(3, [0.4, -0.1], 0, 0))
    np.testing.assert_allclose(M, np.diag([1.4 / 3, 0.9 / 3, 0.7 / 3]), atol=1e-15)


@given(seeds, st.integers(3, 6))
def test_embed_has_section_pattern(seed, d):
    rng = np.random.default_rng(seed)
    xi = X.section_embed(d, rng.normal(size=d - 1), *rng.normal(size=2))
    M = xi_to_matrix(xi)
    assert X.in_section(M)
    np.testing.assert_array_equal(xi.values[d + 1 :], 0)


def test_embed_rejects_small_d():
    with pytest.raises(DimensionMismatch):
        X.section_embed(2, [0.0], 0, 0)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_ellipsoid_samples_are_pure_section_states(d):
    for p in X.sample_section_ellipsoid(50, d, seed=d):
        assert X.is_pure_section_site(p)
        # 4 (xi_1 - (d-2)/2)^2 / d^2 + xi_d^2 + xi_{d+1}^2 = 1
        val = 4 * (p.xi1 - (d - 2) / 2) ** 2 / d**2 + p.xid**2 + p.xid1**2
        assert val == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(p.sphere_point()) == pytest.approx(1.0, abs=1e-12)


def test_sphere_point_round_trip():
    p = X.SectionSite(4, 0.3, 0.2, -0.1)
    q = X.SectionSite.from_sphere_point(4, p.sphere_point())
    np.testing.assert_allclose(q.coords, p.coords, atol=1e-15)


def test_section_coordinates_of_full_rank_state():
    A = np.diag([0.4, 0.3, 0.3]).astype(complex)
    A[0, 1], A[1, 0] = 0.1 - 0.05j, 0.1 + 0.05j
    p = X.section_coordinates(DensityMatrix(A))
    B = p.matrix()
    np.testing.assert_allclose(B[:2, :2], A[:2, :2] / 0.7, atol=1e-15)
    with pytest.raises(DomainError):
        X.section_coordinates(DensityMatrix(np.full((3, 3), 1 / 3)))


def test_divergence_residual_examples():
    eta = X.SectionSite(3, 0.2, 0.3, 0.4)
    xi = X.SectionSite(3, 0.7, -0.2, 0.1)
    assert X.boundary_residual_divergence(eta, eta, xi, 3) == 0
    assert X.boundary_residual_divergence((0, 1, 0), (0, 0, 0), xi, 3) == pytest.approx(xi.xid)


def test_euclidean_residual_examples():
    eta = X.SectionSite(3, 0.2, 0.3, 0.4)
    assert X.boundary_residual_euclidean(eta, eta, (0.1, 0.2, 0.3), 3) == 0


@given(seeds, st.integers(3, 5))
def test_euclidean_residual_is_difference_of_squared_distances(seed, d):
    a, b, q = X.sample_section_ellipsoid(3, d, seed)
    x = q.xi().values
    direct = (x - a.xi().values) @ (x - a.xi().values) - (x - b.xi().values) @ (x - b.xi().values)
    assert X.boundary_residual_euclidean(a, b, q, d) == pytest.approx(direct, abs=1e-12)


def test_coefficient_vectors_not_proportional():
    a, b = X.sample_section_ellipsoid(2, 3, seed=7)
    u = X.divergence_bisector_coefficients(a, b, 3)
    v = X.euclidean_bisector_coefficients(a, b, 3)
    assert X.coefficient_cross(u, v) > 1e-6
    assert X.coefficient_cross(u, 2 * u) < 1e-15


@pytest.mark.parametrize("d", [3, 4])
def test_divergence_residual_sign_on_grid(d):
    grid = X.section_query_grid(d, 8)
    ends = X.sample_section_ellipsoid(6, d, seed=d)
    checked = 0
    for a, b in zip(ends[::2], ends[1::2]):
        for q in grid:
            res = X.boundary_residual_divergence(a, b, X.section_coordinates(q), d)
            if abs(res) > 1e-6:
                checked += 1
                assert np.sign(res) == np.sign(X.divergence_difference(q, a, b))
                assert np.sign(res) == np.sign(X.divergence_difference(q, a, b, dual=True))
    assert checked > 100


def test_query_grid_is_full_rank_section():
    for q in X.section_query_grid(3, 5):
        assert q.is_full_rank() and X.in_section(q.matrix)


def test_symmetric_sites_split_on_symmetry_plane():
    a, b = X.SectionSite(3, 0.5, 1.0, 0.0), X.SectionSite(3, 0.5, -1.0, 0.0)
    samples = X.sample_section_ellipsoid(300, 3, seed=1)
    div = label_samples(X.site_states(samples), X.site_states([a, b]), K.DIVERGENCE)
    geo = X.geodesic_rescaled_labeling(samples, [a, b])
    expect = np.array([0 if s.xid > 0 else 1 for s in samples])
    np.testing.assert_array_equal(div.assignments[~div.boundary_mask], expect[~div.boundary_mask])
    np.testing.assert_array_equal(geo.assignments, expect)


def test_ellipsoid_check_agrees_and_euclid_does_not():
    any_mismatch = False
    for seed in range(10):
        sites = X.sample_section_ellipsoid(2, 3, seed=seed)
        samples = X.sample_section_ellipsoid(200, 3, seed=100 + seed)
        assert X.ellipsoid_sphere_check(sites, samples).agree
        div = label_samples(X.site_states(samples), X.site_states(sites), K.DIVERGENCE)
        euc = label_samples(X.site_states(samples), X.site_states(sites), K.EUCLIDEAN_XI)
        any_mismatch |= not labelings_agree(div, euc).agree
    assert any_mismatch


def test_noncoincidence_witness_exists():
    sites = X.sample_section_ellipsoid(4, 3, seed=0)
    samples = X.sample_section_ellipsoid(1000, 3, seed=1)
    div = label_samples(X.site_states(samples), X.site_states(sites), K.DIVERGENCE)
    euc = label_samples(X.site_states(samples), X.site_states(sites), K.EUCLIDEAN_XI)
    w = X.noncoincidence_witnesses(div, euc, 1e-3)
    assert len(w) > 0
    assert np.all(div.margins[w] > 1e-3) and np.all(euc.margins[w] > 1e-3)


def test_d_below_three_rejected():
    with pytest.raises(DimensionMismatch):
        X.SectionSite(2, 0, 0, 0)
    with pytest.raises(DimensionMismatch):
        X.section_coordinates(maximally_mixed(2))
