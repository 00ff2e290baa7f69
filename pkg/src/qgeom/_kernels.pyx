# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batched complex Jacobi eigensolver and the two capacity loops.

Every function here has a numpy twin in ``_fallback.py`` with the same
signature and return layout; ``_backend.py`` picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, log, exp, hypot, INFINITY

cnp.import_array()


cdef int _jacobi(double complex* A, double complex* V, double* w, int d,
                 double tol, int max_sweeps) noexcept nogil:
    """Diagonalise the row-major Hermitian buffer ``A`` in place.

    On return ``w`` holds ascending eigenvalues and the columns of ``V`` the
    matching eigenvectors. Returns the number of sweeps performed.
    """
    cdef int p, q, k, sweep, j, best
    cdef double off, g, tau, t, c, s, app, aqq, scale, thresh, tmp
    cdef double complex e, ec, se, sec, akp, akq, apk, aqk, swap

    for k in range(d * d):
        V[k] = 0
    for k in range(d):
        V[k * d + k] = 1

    scale = 0.0
    for k in range(d * d):
        scale += A[k].real * A[k].real + A[k].imag * A[k].imag
    scale = sqrt(scale)
    thresh = tol * (scale if scale > 1.0 else 1.0)

    sweep = 0
    while sweep < max_sweeps:
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off += A[p * d + q].real * A[p * d + q].real + A[p * d + q].imag * A[p * d + q].imag
        off = sqrt(2.0 * off)
        if off < thresh:
            break
        sweep += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                g = hypot(A[p * d + q].real, A[p * d + q].imag)
                if g < 1e-300:
                    continue
                e = (A[p * d + q].real / g) + 1j * (A[p * d + q].imag / g)
                ec = e.conjugate()
                app = A[p * d + p].real
                aqq = A[q * d + q].real
                tau = (aqq - app) / (2.0 * g)
                if tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                se = s * e
                sec = s * ec
                for k in range(d):
                    akp = A[k * d + p]
                    akq = A[k * d + q]
                    A[k * d + p] = c * akp - sec * akq
                    A[k * d + q] = se * akp + c * akq
                    akp = V[k * d + p]
                    akq = V[k * d + q]
                    V[k * d + p] = c * akp - sec * akq
                    V[k * d + q] = se * akp + c * akq
                for k in range(d):
                    apk = A[p * d + k]
                    aqk = A[q * d + k]
                    A[p * d + k] = c * apk - se * aqk
                    A[q * d + k] = sec * apk + c * aqk
                A[p * d + q] = 0
                A[q * d + p] = 0
                A[p * d + p] = app - t * g
                A[q * d + q] = aqq + t * g

    for k in range(d):
        w[k] = A[k * d + k].real
    # selection sort: d <= 8
    for k in range(d - 1):
        best = k
        for j in range(k + 1, d):
            if w[j] < w[best]:
                best = j
        if best != k:
            tmp = w[k]
            w[k] = w[best]
            w[best] = tmp
            for j in range(d):
                swap = V[j * d + k]
                V[j * d + k] = V[j * d + best]
                V[j * d + best] = swap
    return sweep


def eigh(a, double tol=1e-13, int max_sweeps=100):
    """Batched Hermitian eigendecomposition of an ``(n, d, d)`` complex array.

    Returns ``(w, v, sweeps)`` with ``w`` of shape ``(n, d)`` ascending,
    ``v`` of shape ``(n, d, d)`` (eigenvectors in columns) and the sweep
    count per matrix.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] src = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = src.shape[0]
    cdef int d = <int>src.shape[1]
    work_arr = src.copy()
    cdef double complex[:, :, ::1] work = work_arr
    v_arr = np.empty((n, d, d), dtype=np.complex128)
    w_arr = np.empty((n, d), dtype=np.float64)
    sweeps_arr = np.empty(n, dtype=np.intc)
    cdef double complex[:, :, ::1] vv = v_arr
    cdef double[:, ::1] ww = w_arr
    cdef int[::1] sw = sweeps_arr
    cdef Py_ssize_t i
    if n == 0 or d == 0:
        return w_arr, v_arr, sweeps_arr
    with nogil:
        for i in range(n):
            sw[i] = _jacobi(&work[i, 0, 0], &vv[i, 0, 0], &ww[i, 0], d, tol, max_sweeps)
    return w_arr, v_arr, sweeps_arr


cdef double _log_of(double complex* sigma, double complex* L, double complex* A,
                    double complex* V, double* w, int d, double rank_floor) noexcept nogil:
    """Write log(sigma) into ``L``; eigenvalues below ``rank_floor`` trigger a
    mix with ``rank_floor * I/d``. Returns the minimum eigenvalue before mixing."""
    cdef int a, b, k
    cdef double lam_min
    cdef double complex acc
    for k in range(d * d):
        A[k] = sigma[k]
    _jacobi(A, V, w, d, 1e-13, 100)
    lam_min = w[0]
    if lam_min < rank_floor:
        for k in range(d):
            w[k] = (w[k] + rank_floor / d) / (1.0 + rank_floor)
    for k in range(d):
        w[k] = log(w[k]) if w[k] > 0 else log(rank_floor / d)
    for a in range(d):
        for b in range(d):
            acc = 0
            for k in range(d):
                acc = acc + V[a * d + k] * w[k] * V[b * d + k].conjugate()
            L[a * d + b] = acc
    return lam_min


cdef void _divergences(const double complex[:, :, ::1] P, const double[::1] neg_s,
                       double complex* L, double* D, Py_ssize_t n, int d) noexcept nogil:
    """D_i = -S(p_i) - Re Tr(p_i log sigma)."""
    cdef Py_ssize_t i
    cdef int a, b
    cdef double tr
    for i in range(n):
        tr = 0.0
        for a in range(d):
            for b in range(d):
                tr += (P[i, a, b] * L[b * d + a]).real
        D[i] = neg_s[i] - tr


def seb_frank_wolfe(points, neg_entropy, long max_iter, double tol, double rank_floor=1e-12):
    """Smallest enclosing divergence ball by damped farthest-point mixing.

    ``sigma_{k+1} = (1 - a_k) sigma_k + a_k p*`` with ``a_k = 1/(k+2)`` and
    ``p*`` the current farthest point, starting from the uniform average.
    Stops when ``max_i D(p_i||sigma) - best_lower < tol`` where ``best_lower``
    is the best Holevo quantity ``sum_i w_i D(p_i||sigma_w)`` seen.

    Returns ``(weights, center, iterations, upper, lower, converged, divergences)``.
    On non-convergence the iterate with the smallest upper bound is returned.
    """
    cdef double complex[:, :, ::1] P = np.ascontiguousarray(points, dtype=np.complex128)
    cdef double[::1] neg_s = np.ascontiguousarray(neg_entropy, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0]
    cdef int d = <int>P.shape[1]
    w_arr = np.full(n, 1.0 / n)
    sigma_arr = np.asarray(P).mean(axis=0)
    D_arr = np.empty(n)
    best_w_arr = w_arr.copy()
    best_sigma_arr = sigma_arr.copy()
    best_D_arr = np.empty(n)
    cdef double[::1] W = w_arr
    cdef double complex[:, ::1] S = sigma_arr
    cdef double[::1] D = D_arr
    cdef double[::1] BW = best_w_arr
    cdef double complex[:, ::1] BS = best_sigma_arr
    cdef double[::1] BD = best_D_arr
    L_arr = np.empty((d, d), dtype=np.complex128)
    A_arr = np.empty((d, d), dtype=np.complex128)
    V_arr = np.empty((d, d), dtype=np.complex128)
    e_arr = np.empty(d)
    cdef double complex[:, ::1] L = L_arr
    cdef double complex[:, ::1] A = A_arr
    cdef double complex[:, ::1] V = V_arr
    cdef double[::1] ev = e_arr
    cdef long k = 0
    cdef Py_ssize_t i, idx
    cdef int a, b
    cdef double up, lower, best_lower = -INFINITY, best_up = INFINITY, best_lower_at_best = -INFINITY
    cdef double alpha
    cdef long best_k = 0
    cdef bint converged = False

    with nogil:
        while True:
            _log_of(&S[0, 0], &L[0, 0], &A[0, 0], &V[0, 0], &ev[0], d, rank_floor)
            _divergences(P, neg_s, &L[0, 0], &D[0], n, d)
            idx = 0
            up = D[0]
            lower = 0.0
            for i in range(n):
                if D[i] > up:
                    up = D[i]
                    idx = i
                lower += W[i] * D[i]
            if lower > best_lower:
                best_lower = lower
            if up < best_up:
                best_up = up
                best_k = k
                best_lower_at_best = best_lower
                for i in range(n):
                    BW[i] = W[i]
                    BD[i] = D[i]
                for a in range(d):
                    for b in range(d):
                        BS[a, b] = S[a, b]
            if up - best_lower < tol:
                converged = True
                break
            if k >= max_iter:
                break
            alpha = 1.0 / (k + 2)
            for i in range(n):
                W[i] *= 1.0 - alpha
            W[idx] += alpha
            for a in range(d):
                for b in range(d):
                    S[a, b] = (1.0 - alpha) * S[a, b] + alpha * P[idx, a, b]
            k += 1

    if converged:
        return w_arr, sigma_arr, k, up, best_lower, True, D_arr
    return best_w_arr, best_sigma_arr, best_k, best_up, best_lower, False, best_D_arr


def blahut_arimoto(points, neg_entropy, long max_iter, double tol, double rank_floor=1e-12):
    """Multiplicative weight updates ``w_i <- w_i exp(D(p_i||sigma_w)) / Z``.

    Returns ``(weights, center, iterations, upper, lower, converged, divergences)``
    where ``lower`` is the Holevo quantity of the final weights and ``upper``
    the largest divergence from the final center.
    """
    cdef double complex[:, :, ::1] P = np.ascontiguousarray(points, dtype=np.complex128)
    cdef double[::1] neg_s = np.ascontiguousarray(neg_entropy, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0]
    cdef int d = <int>P.shape[1]
    w_arr = np.full(n, 1.0 / n)
    sigma_arr = np.empty((d, d), dtype=np.complex128)
    D_arr = np.empty(n)
    cdef double[::1] W = w_arr
    cdef double complex[:, ::1] S = sigma_arr
    cdef double[::1] D = D_arr
    L_arr = np.empty((d, d), dtype=np.complex128)
    A_arr = np.empty((d, d), dtype=np.complex128)
    V_arr = np.empty((d, d), dtype=np.complex128)
    e_arr = np.empty(d)
    cdef double complex[:, ::1] L = L_arr
    cdef double complex[:, ::1] A = A_arr
    cdef double complex[:, ::1] V = V_arr
    cdef double[::1] ev = e_arr
    cdef long k = 0
    cdef Py_ssize_t i
    cdef int a, b
    cdef double up, lower, z
    cdef bint converged = False

    with nogil:
        while True:
            for a in range(d):
                for b in range(d):
                    S[a, b] = 0
            for i in range(n):
                for a in range(d):
                    for b in range(d):
                        S[a, b] = S[a, b] + W[i] * P[i, a, b]
            _log_of(&S[0, 0], &L[0, 0], &A[0, 0], &V[0, 0], &ev[0], d, rank_floor)
            _divergences(P, neg_s, &L[0, 0], &D[0], n, d)
            up = D[0]
            lower = 0.0
            for i in range(n):
                if D[i] > up:
                    up = D[i]
                lower += W[i] * D[i]
            if up - lower < tol:
                converged = True
                break
            if k >= max_iter:
                break
            z = 0.0
            for i in range(n):
                W[i] = W[i] * exp(D[i] - up)
                if W[i] < 1e-250:
                    W[i] = 0.0
                z += W[i]
            for i in range(n):
                W[i] /= z
            k += 1

    return w_arr, sigma_arr, k, up, lower, bool(converged), D_arr
