"""Pure-Python (numpy) twins of the compiled kernels in ``_kernels.pyx``.

The Jacobi sweep is vectorised across the batch axis: every matrix in the
batch receives the (p, q) rotation at the same time, so the cost per sweep
is O(d^2) numpy calls independent of the batch size.
"""
import numpy as np


def eigh(a, tol=1e-13, max_sweeps=100):
    A = np.array(a, dtype=np.complex128, copy=True)
    if A.ndim != 3:
        raise ValueError("expected an (n, d, d) array")
    n, d, _ = A.shape
    V = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d)).copy()
    sweeps = np.zeros(n, dtype=np.intc)
    if n == 0 or d == 0:
        return np.empty((n, d)), V, sweeps

    scale = np.sqrt(np.sum(np.abs(A) ** 2, axis=(1, 2)))
    thresh = tol * np.maximum(scale, 1.0)
    iu = np.triu_indices(d, 1)
    rows = np.arange(n)

    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.abs(A[:, iu[0], iu[1]]) ** 2, axis=1))
        active = off >= thresh
        if not active.any():
            break
        sweeps[active] += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[:, p, q]
                g = np.abs(apq)
                rot = active & (g >= 1e-300)
                if not rot.any():
                    continue
                idx = rows[rot]
                g = g[rot]
                e = apq[rot] / g
                ec = e.conj()
                app = A[idx, p, p].real
                aqq = A[idx, q, q].real
                tau = (aqq - app) / (2.0 * g)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cc = c[:, None]
                for M in (A, V):
                    colp = M[idx, :, p]
                    colq = M[idx, :, q]
                    M[idx, :, p] = cc * colp - (s * ec)[:, None] * colq
                    M[idx, :, q] = (s * e)[:, None] * colp + cc * colq
                rowp = A[idx, p, :]
                rowq = A[idx, q, :]
                A[idx, p, :] = cc * rowp - (s * e)[:, None] * rowq
                A[idx, q, :] = (s * ec)[:, None] * rowp + cc * rowq
                A[idx, p, q] = 0.0
                A[idx, q, p] = 0.0
                A[idx, p, p] = app - t * g
                A[idx, q, q] = aqq + t * g

    w = np.real(np.diagonal(A, axis1=1, axis2=2)).copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    return w, V, sweeps


def _log_of(sigma, rank_floor):
    d = sigma.shape[0]
    w, V, _ = eigh(sigma[None])
    w, V = w[0], V[0]
    if w[0] < rank_floor:
        w = (w + rank_floor / d) / (1.0 + rank_floor)
    logw = np.log(np.where(w > 0, w, rank_floor / d))
    return (V * logw) @ V.conj().T


def _divergences(P, neg_s, L):
    return neg_s - np.einsum("iab,ba->i", P, L).real


def seb_frank_wolfe(points, neg_entropy, max_iter, tol, rank_floor=1e-12):
    P = np.ascontiguousarray(points, dtype=np.complex128)
    neg_s = np.asarray(neg_entropy, dtype=np.float64)
    n = P.shape[0]
    W = np.full(n, 1.0 / n)
    S = P.mean(axis=0)
    best_lower, best_up = -np.inf, np.inf
    best = None
    k = 0
    while True:
        D = _divergences(P, neg_s, _log_of(S, rank_floor))
        idx = int(np.argmax(D))
        up = float(D[idx])
        lower = float(W @ D)
        best_lower = max(best_lower, lower)
        if up < best_up:
            best_up = up
            best = (W.copy(), S.copy(), k, D.copy())
        if up - best_lower < tol:
            return W, S, k, up, best_lower, True, D
        if k >= max_iter:
            break
        alpha = 1.0 / (k + 2)
        W *= 1.0 - alpha
        W[idx] += alpha
        S = (1.0 - alpha) * S + alpha * P[idx]
        k += 1
    bw, bs, bk, bd = best
    return bw, bs, bk, best_up, best_lower, False, bd


def blahut_arimoto(points, neg_entropy, max_iter, tol, rank_floor=1e-12):
    P = np.ascontiguousarray(points, dtype=np.complex128)
    neg_s = np.asarray(neg_entropy, dtype=np.float64)
    n = P.shape[0]
    W = np.full(n, 1.0 / n)
    k = 0
    while True:
        S = np.einsum("i,iab->ab", W, P)
        D = _divergences(P, neg_s, _log_of(S, rank_floor))
        up = float(D.max())
        lower = float(W @ D)
        if up - lower < tol:
            return W, S, k, up, lower, True, D
        if k >= max_iter:
            return W, S, k, up, lower, False, D
        W = W * np.exp(D - up)
        W[W < 1e-250] = 0.0
        W /= W.sum()
        k += 1
