import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import bloch, random_hermitian, random_pure
from qgeom import linalg
from qgeom.errors import DimensionMismatch, DomainError, NotHermitian

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 8)


def test_identity_eigenvalues():
    e = linalg.hermitian_eigen(np.eye(2))
    np.testing.assert_allclose(e.eigenvalues, [1, 1], atol=1e-14)


def test_diagonal_eigenpairs():
    e = linalg.hermitian_eigen(np.diag([0.0, 1.0]))
    np.testing.assert_allclose(e.eigenvalues, [0, 1], atol=1e-14)
    np.testing.assert_allclose(np.abs(e.eigenvectors), np.eye(2), atol=1e-14)


def test_pauli_x_eigenvalues():
    e = linalg.hermitian_eigen([[0, 1], [1, 0]])
    np.testing.assert_allclose(e.eigenvalues, [-1, 1], atol=1e-14)


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        linalg.hermitian_eigen([[0, 1], [0, 0]])
    with pytest.raises(DimensionMismatch):
        linalg.hermitian_eigen(np.ones((2, 3)))


def test_small_asymmetry_is_tolerated():
    A = np.array([[1, 0.5 + 1e-11], [0.5, 2]])
    linalg.hermitian_eigen(A)


@given(seeds, dims)
def test_reconstruction_and_orthonormality(seed, d):
    H = random_hermitian(d, np.random.default_rng(seed), scale=10 ** np.random.default_rng(seed).uniform(-3, 3))
    e = linalg.hermitian_eigen(H)
    assert np.abs(e.reconstruct() - H).max() < 1e-10 * max(1.0, np.abs(H).max())
    V = e.eigenvectors
    assert np.abs(V.conj().T @ V - np.eye(d)).max() < 1e-10
    assert np.all(np.diff(e.eigenvalues) >= 0)
    np.testing.assert_allclose(e.eigenvalues, np.linalg.eigvalsh(H), atol=1e-10 * max(1.0, np.abs(H).max()))


def test_degenerate_and_repeated_spectra(rng):
    U = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))[0]
    H = U @ np.diag([1, 1, 1, 2, 2, 3]) @ U.conj().T
    e = linalg.hermitian_eigen(H)
    np.testing.assert_allclose(e.eigenvalues, [1, 1, 1, 2, 2, 3], atol=1e-12)
    assert np.abs(e.reconstruct() - H).max() < 1e-12


def test_batch_matches_single(rng):
    stack = np.stack([random_hermitian(4, rng) for _ in range(20)])
    w, V = linalg.eigh_batch(stack)
    for i in range(20):
        e = linalg.hermitian_eigen(stack[i])
        np.testing.assert_allclose(w[i], e.eigenvalues, atol=1e-14)


def test_sqrt_of_diagonal():
    np.testing.assert_allclose(linalg.matrix_function(np.diag([4.0, 9.0]), np.sqrt), np.diag([2, 3]), atol=1e-14)


def test_log_of_identity():
    np.testing.assert_allclose(linalg.matrix_function(np.eye(3), np.log), np.zeros((3, 3)), atol=1e-14)


def test_sqrt_of_projector_is_itself():
    P = bloch(1, 0, 0)
    np.testing.assert_allclose(linalg.matrix_function(P, np.sqrt), P, atol=1e-12)


def test_log_of_singular_is_domain_error():
    with pytest.raises(DomainError):
        linalg.matrix_function(np.diag([1.0, 0.0]), np.log)
    with pytest.raises(DomainError):
        linalg.matrix_function(np.diag([1.0, -0.5]), np.sqrt)


def test_roundoff_negative_eigenvalues_are_clamped():
    A = np.diag([1.0, -5e-11])
    np.testing.assert_allclose(linalg.matrix_function(A, np.sqrt), np.diag([1, 0]), atol=1e-14)


@given(seeds, dims)
def test_identity_function_and_sqrt_square(seed, d):
    rng = np.random.default_rng(seed)
    H = random_hermitian(d, rng)
    assert np.abs(linalg.matrix_function(H, lambda w: w) - H).max() < 1e-12
    P = H @ H.conj().T
    S = linalg.matrix_function(P, np.sqrt)
    assert np.abs(linalg.matrix_function(S, np.square) - P).max() < 1e-9


def test_trace_product_examples():
    assert linalg.trace_product(np.eye(2), np.eye(2)) == pytest.approx(2.0, abs=1e-15)
    assert linalg.trace_product(np.diag([1, 0]), np.diag([0, 1])) == 0.0
    assert linalg.trace_product(bloch(0, 0, 1), bloch(1, 0, 0)) == pytest.approx(0.5, abs=1e-15)


def test_trace_product_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.trace_product(np.eye(2), np.eye(3))


@given(seeds, st.integers(2, 6))
def test_trace_product_symmetry(seed, d):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(d, rng), random_pure(d, rng)
    assert abs(linalg.trace_product(A, B) - linalg.trace_product(B, A)) < 1e-12
    assert linalg.trace_product(A, B) == pytest.approx(np.trace(A @ B).real, abs=1e-12)
