"""Reference implementations built on LAPACK (numpy/scipy), independent of the package kernels."""
import numpy as np
from scipy.linalg import logm, sqrtm


def random_hermitian(d, rng, scale=1.0):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (A + A.conj().T)


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pure(d, rng):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_unitary(d, rng):
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def bloch(x, y, z):
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def relative_entropy(sigma, rho):
    """``Tr sigma (log sigma - log rho)`` via scipy's matrix logarithm; sigma may be singular."""
    w, V = np.linalg.eigh(sigma)
    w = np.clip(w, 0, None)
    ent = sum(x * np.log(x) for x in w if x > 1e-300)
    return float(ent - np.trace(sigma @ logm(rho)).real)


def fidelity_root(rho, sigma):
    s = sqrtm(sigma)
    return float(np.trace(sqrtm(s @ rho @ s)).real)


def bures(rho, sigma):
    return float(np.sqrt(max(0.0, 1.0 - fidelity_root(rho, sigma))))


def entropy(rho):
    w = np.clip(np.linalg.eigvalsh(rho), 0, None)
    return float(-sum(x * np.log(x) for x in w if x > 0))


def holevo(points, weights):
    avg = sum(w * p for w, p in zip(weights, points))
    return entropy(avg) - sum(w * entropy(p) for w, p in zip(weights, points))


def binary_entropy(p):
    return float(-sum(q * np.log(q) for q in (p, 1 - p) if q > 0))


def brute_force_labels(dist, variant="nearest"):
    """Per-row best index by explicit loops."""
    out = []
    for row in dist:
        best = 0
        for j in range(1, len(row)):
            if (row[j] < row[best]) if variant == "nearest" else (row[j] > row[best]):
                best = j
        out.append(best)
    return np.array(out)
