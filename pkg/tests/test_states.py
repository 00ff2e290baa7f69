import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import bloch, random_density, random_hermitian
from qgeom import states as S
from qgeom.errors import DimensionMismatch, InvalidState, NotHermitian, OutsideBall, RangeError, TraceNotOne

seeds = st.integers(0, 2**32 - 1)


def unit_trace_hermitian(d, rng):
    H = random_hermitian(d, rng)
    return H + (1 - np.trace(H).real) * np.eye(d) / d


@pytest.mark.parametrize(
    "b, M",
    [
        ((0, 0, 0), np.eye(2) / 2),
        ((0, 0, 1), np.diag([1, 0])),
        ((1, 0, 0), np.full((2, 2), 0.5)),
    ],
)
def test_bloch_to_density_examples(b, M):
    np.testing.assert_allclose(S.bloch_to_density(b).matrix, M, atol=1e-15)


def test_bloch_outside_ball():
    with pytest.raises(OutsideBall):
        S.bloch_to_density((0.8, 0.8, 0))
    S.bloch_to_density((1 + 5e-11, 0, 0))


@pytest.mark.parametrize(
    "M, b",
    [
        (np.eye(2) / 2, (0, 0, 0)),
        (np.diag([0, 1]), (0, 0, -1)),
        (np.array([[0.5, -0.5j], [0.5j, 0.5]]), (0, 1, 0)),
    ],
)
def test_density_to_bloch_examples(M, b):
    v = S.density_to_bloch(S.DensityMatrix(M)).as_array()
    np.testing.assert_allclose(v, b, atol=1e-15)


def test_density_to_bloch_needs_qubit():
    with pytest.raises(DimensionMismatch):
        S.density_to_bloch(S.maximally_mixed(3))


@given(st.floats(-1, 1), st.floats(0, 2 * np.pi), st.floats(0, 1))
def test_bloch_round_trip(cz, phi, r):
    s = np.sqrt(1 - cz * cz)
    v = r * np.array([s * np.cos(phi), s * np.sin(phi), cz])
    rho = S.bloch_to_density(v)
    back = S.density_to_bloch(rho).as_array()
    np.testing.assert_allclose(S.bloch_to_density(back).matrix, rho.matrix, atol=1e-12)


def test_xi_zero_is_maximally_mixed():
    np.testing.assert_allclose(S.xi_to_matrix(S.XiVector(3, np.zeros(8))), np.eye(3) / 3, atol=1e-15)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_xi_matches_bloch_at_d2(a, b, c):
    M = S.xi_to_matrix(S.XiVector(2, [a, b, c]))
    np.testing.assert_allclose(M, bloch(b, c, a), atol=1e-14)


def test_xi_needs_no_positivity():
    v = np.zeros(8)
    v[0] = 2.0
    M = S.xi_to_matrix(S.XiVector(3, v))
    np.testing.assert_allclose(M, np.diag([1, 1 / 3, -1 / 3]), atol=1e-15)
    rep = S.check_state(M)
    assert rep.hermitian and rep.unit_trace and not rep.psd
    assert rep.min_eigenvalue == pytest.approx(-1 / 3, abs=1e-12)


def test_matrix_to_xi_examples():
    np.testing.assert_allclose(S.matrix_to_xi(np.eye(4) / 4).values, 0, atol=1e-15)
    xi = S.matrix_to_xi(np.diag([2 / 3, 1 / 3, 0]))
    assert xi[1] == pytest.approx(1.0, abs=1e-14)
    assert xi[2] == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(xi.values[2:], 0, atol=1e-15)


def test_matrix_to_xi_rejects_bad_trace():
    with pytest.raises(TraceNotOne):
        S.matrix_to_xi(np.eye(2))


def test_xi_layout_places_first_offdiagonal_pair_at_entry_12():
    d = 4
    v = np.zeros(d * d - 1)
    v[d - 1], v[d] = 0.3, 0.2
    M = S.xi_to_matrix(S.XiVector(d, v))
    assert M[0, 1] == pytest.approx(0.15 - 0.1j)
    assert S.offdiag_layout(3) == ((0, 1), (0, 2), (1, 2))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_xi_round_trip(d, rng):
    for _ in range(100):
        H = unit_trace_hermitian(d, rng)
        xi = S.matrix_to_xi(H)
        M = S.xi_to_matrix(xi)
        assert np.abs(M - H).max() < 1e-12
        assert abs(np.trace(M) - 1) < 1e-14


def test_xi_vector_length_checked():
    with pytest.raises(DimensionMismatch):
        S.XiVector(3, np.zeros(5))


def test_check_state_examples():
    rep = S.check_state(np.eye(2) / 2)
    assert rep.valid and rep.min_eigenvalue == pytest.approx(0.5)
    assert not S.check_state(np.diag([1.5, -0.5])).psd
    assert not S.check_state([[0.5, 1], [0, 0.5]]).hermitian


def test_density_matrix_validation():
    with pytest.raises(TraceNotOne):
        S.DensityMatrix(np.eye(2))
    with pytest.raises(InvalidState):
        S.DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(NotHermitian):
        S.DensityMatrix([[0.5, 1], [0, 0.5]])
    S.DensityMatrix(np.diag([1 + 5e-11, -5e-11]))


def test_density_matrix_is_immutable():
    rho = S.maximally_mixed(2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_purity_examples():
    assert S.purity(S.maximally_mixed(2)) == pytest.approx(0.5)
    assert not S.is_pure(S.maximally_mixed(2))
    assert S.is_pure(S.DensityMatrix(np.diag([1.0, 0.0])))
    assert S.purity(S.bloch_to_density((0.6, 0, 0.8))) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(-1, 1), st.floats(0, 2 * np.pi), st.floats(0, 1))
def test_purity_consistent_with_bloch_norm(cz, phi, r):
    s = np.sqrt(1 - cz * cz)
    v = r * np.array([s * np.cos(phi), s * np.sin(phi), cz])
    rho = S.bloch_to_density(v)
    assert S.purity(rho) == pytest.approx((1 + v @ v) / 2, abs=1e-14)
    # Tr rho^2 = (1 + |b|^2)/2, so the purity threshold is |b|^2 >= 1 - 2 tol
    if abs(v @ v - (1 - 2 * S.PURE_TOL)) > 1e-12:
        assert S.is_pure(rho) == (v @ v >= 1 - 2 * S.PURE_TOL)


@pytest.mark.parametrize("gap, pure", [(0.0, True), (1e-9, True), (1e-8, False), (0.1, False)])
def test_purity_threshold_in_bloch_terms(gap, pure):
    assert S.is_pure(S.bloch_to_density((0, 0, np.sqrt(1 - gap)))) is pure


def test_shrink_examples():
    rho = S.bloch_to_density((0, 0, 1))
    np.testing.assert_allclose(S.shrink_toward_center(rho, 1).matrix, rho.matrix, atol=0)
    np.testing.assert_allclose(S.shrink_toward_center(rho, 0).matrix, np.eye(2) / 2, atol=0)
    v = S.density_to_bloch(S.shrink_toward_center(rho, 0.999)).as_array()
    np.testing.assert_allclose(v, (0, 0, 0.999), atol=1e-15)
    with pytest.raises(RangeError):
        S.shrink_toward_center(rho, 1.5)


@given(seeds, st.integers(2, 5))
def test_shrink_purity_decreases_and_spectrum_is_exact(seed, d):
    rng = np.random.default_rng(seed)
    rho = S.DensityMatrix(random_density(d, rng))
    prev = S.purity(rho)
    for r in (0.9, 0.7, 0.4, 0.1):
        s = S.shrink_toward_center(rho, r)
        p = S.purity(s)
        assert p < prev
        prev = p
        np.testing.assert_allclose(s.eig.reconstruct(), s.matrix, atol=1e-12)


def test_random_pure_states_are_pure(rng):
    for rho in S.random_pure_states(50, 4, rng):
        assert S.is_pure(rho)


def test_state_literals_round_trip():
    lits = [
        {"bloch": [0.1, 0.2, 0.3]},
        {"xi": {"d": 3, "values": [0.1, 0.2, 0, 0, 0, 0, 0, 0]}},
        {"matrix": [[[0.5, 0], [0, -0.25]], [[0, 0.25], [0.5, 0]]]},
    ]
    for lit in lits:
        rho = S.parse_state(lit)
        again = S.parse_state(S.state_literal(rho))
        np.testing.assert_allclose(again.matrix, rho.matrix, atol=1e-15)
    np.testing.assert_allclose(S.parse_state(lits[2]).matrix, [[0.5, -0.25j], [0.25j, 0.5]])


@pytest.mark.parametrize("bad", [{}, {"foo": 1}, {"bloch": [1, 2]}, {"matrix": [[1, 2], [3, 4]]}, [1]])
def test_state_literal_errors(bad):
    with pytest.raises(ValueError):
        S.parse_state(bad)
