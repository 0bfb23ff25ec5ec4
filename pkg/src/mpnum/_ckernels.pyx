# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Mirrors ``_pykernels`` operation for operation.  Built with
``-ffp-contract=off`` so no multiply-add is fused and every result is the
plain IEEE sequence the numpy fallback produces.  Parallel loops only split
independent output columns, so results do not depend on the thread count.
"""

from cython.parallel cimport prange
from libc.math cimport sqrt, fabs, copysign
from libc.stdint cimport uint64_t, int64_t, uint16_t
from libc.string cimport memcpy

cimport cython
from cython cimport floating

import numpy as np

NAME = "compiled"

cdef Py_ssize_t IBLOCK = 128


cdef inline uint16_t _enc(double x) noexcept nogil:
    cdef uint64_t b
    memcpy(&b, &x, 8)
    cdef uint64_t sign = (b >> 63) << 15
    cdef int64_t exp = <int64_t>((b >> 52) & 0x7FF)
    cdef uint64_t man = b & ((<uint64_t>1 << 52) - 1)
    cdef uint64_t sig, q, rem, half
    cdef int64_t e, shift, base
    if exp == 0x7FF:
        if man != 0:
            return 0x7E00
        return <uint16_t>(sign | 0x7C00)
    if exp == 0:
        return <uint16_t>sign
    e = exp - 1023
    if e > 15:
        return <uint16_t>(sign | 0x7C00)
    sig = man | (<uint64_t>1 << 52)
    if e >= -14:
        shift = 42
        base = ((e + 15) << 10) - 1024
    else:
        shift = 28 - e
        if shift > 63:
            shift = 63
        base = 0
    q = sig >> shift
    rem = sig & ((<uint64_t>1 << shift) - 1)
    half = <uint64_t>1 << (shift - 1)
    if rem > half or (rem == half and (q & 1)):
        q += 1
    return <uint16_t>(sign | <uint64_t>(base + <int64_t>q))


def encode_f16(x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(xv.shape[0], dtype=np.uint16)
    cdef uint16_t[::1] ov = out
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _enc(xv[i])
    return out


def seq_sum(x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double s
    if n == 0:
        return 0.0
    s = xv[0]
    for i in range(1, n):
        s = s + xv[i]
    return s


def col_sumsq(G):
    if G.dtype == np.float32:
        out = np.zeros(G.shape[1], dtype=np.float32)
        _col_sumsq[float](G, out)
    else:
        out = np.zeros(G.shape[1], dtype=np.float64)
        _col_sumsq[double](G, out)
    return out


cdef void _col_sumsq(floating[::1, :] G, floating[::1] out) noexcept:
    cdef Py_ssize_t i, j, m = G.shape[0], n = G.shape[1]
    cdef floating s
    if m == 0:
        return
    for j in range(n):
        s = G[0, j] * G[0, j]
        for i in range(1, m):
            s = s + G[i, j] * G[i, j]
        out[j] = s


def gemm_nn(floating[::1, :] A, floating[::1, :] B, floating[::1, :] C, int nthreads=1):
    """C += A @ B, inner index accumulated in increasing order."""
    cdef Py_ssize_t m = A.shape[0], K = A.shape[1], n = B.shape[1]
    cdef Py_ssize_t ib, iend, i, j, k
    cdef floating b
    for ib in range(0, m, IBLOCK):
        iend = ib + IBLOCK
        if iend > m:
            iend = m
        for j in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
            for k in range(K):
                b = B[k, j]
                for i in range(ib, iend):
                    C[i, j] = C[i, j] + A[i, k] * b


def chol_upper(floating[::1, :] A, int nthreads=1):
    """Right-looking Cholesky A = U^T U in place. Returns -1 or the failing column."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, k
    cdef floating d, r, ukj
    tmp_arr = np.zeros(n, dtype=np.float32 if floating is float else np.float64)
    cdef floating[::1] tmp = tmp_arr
    for k in range(n):
        d = A[k, k]
        if not d > 0:
            return k
        r = <floating>sqrt(d)
        A[k, k] = r
        for j in range(k + 1, n):
            A[k, j] = A[k, j] / r
            tmp[j] = A[k, j]
        for j in prange(k + 1, n, nogil=True, num_threads=nthreads, schedule="static"):
            ukj = tmp[j]
            for i in range(k + 1, j + 1):
                A[i, j] = A[i, j] - tmp[i] * ukj
    for j in range(n):
        for i in range(j + 1, n):
            A[i, j] = 0
    return -1


def trsm_lower(floating[::1, :] L, floating[::1, :] B, bint unit=False, int nthreads=1):
    """Solve L X = B in place by forward substitution."""
    cdef Py_ssize_t n = L.shape[0], ncols = B.shape[1]
    cdef Py_ssize_t i, j, k
    cdef floating x
    for j in prange(ncols, nogil=True, num_threads=nthreads, schedule="static"):
        for k in range(n):
            x = B[k, j]
            if not unit:
                x = x / L[k, k]
            B[k, j] = x
            for i in range(k + 1, n):
                B[i, j] = B[i, j] - L[i, k] * x


def trsm_upper(floating[::1, :] U, floating[::1, :] B, bint unit=False, int nthreads=1):
    """Solve U X = B in place by back substitution."""
    cdef Py_ssize_t n = U.shape[0], ncols = B.shape[1]
    cdef Py_ssize_t i, j, k
    cdef floating x
    for j in prange(ncols, nogil=True, num_threads=nthreads, schedule="static"):
        for k in range(n - 1, -1, -1):
            x = B[k, j]
            if not unit:
                x = x / U[k, k]
            B[k, j] = x
            for i in range(k):
                B[i, j] = B[i, j] - U[i, k] * x


def lu_factor(floating[::1, :] A, Py_ssize_t[::1] piv, int nthreads=1):
    """In-place LU with partial pivoting. Returns -1 or the zero-pivot column."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef floating amax, pv, akj, t
    for k in range(n):
        p = k
        amax = fabs(A[k, k])
        for i in range(k + 1, n):
            if fabs(A[i, k]) > amax:
                amax = fabs(A[i, k])
                p = i
        piv[k] = p
        if p != k:
            for j in range(n):
                t = A[k, j]
                A[k, j] = A[p, j]
                A[p, j] = t
        pv = A[k, k]
        if pv == 0:
            return k
        for i in range(k + 1, n):
            A[i, k] = A[i, k] / pv
        for j in prange(k + 1, n, nogil=True, num_threads=nthreads, schedule="static"):
            akj = A[k, j]
            for i in range(k + 1, n):
                A[i, j] = A[i, j] - A[i, k] * akj
    return -1


def jacobi_sweeps(floating[::1, :] G, floating[::1, :] V, floating tol, floating skip2, int max_sweeps):
    """One-sided cyclic Jacobi on the columns of G, accumulating rotations in V.

    Returns the number of sweeps used, or -1 without convergence.
    """
    cdef Py_ssize_t m = G.shape[0], n = G.shape[1], nv = V.shape[0]
    cdef Py_ssize_t i, j, r
    cdef int sweep
    cdef bint rotated
    cdef floating alpha, beta, gamma, zeta, t, c, s, gi, gj
    cdef floating one = 1, two = 2
    cdef int used = -1
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            rotated = False
            for i in range(n - 1):
                for j in range(i + 1, n):
                    alpha = G[0, i] * G[0, i]
                    beta = G[0, j] * G[0, j]
                    for r in range(1, m):
                        alpha = alpha + G[r, i] * G[r, i]
                    for r in range(1, m):
                        beta = beta + G[r, j] * G[r, j]
                    if alpha <= skip2 or beta <= skip2:
                        continue
                    gamma = G[0, i] * G[0, j]
                    for r in range(1, m):
                        gamma = gamma + G[r, i] * G[r, j]
                    if fabs(gamma) <= tol * (<floating>sqrt(alpha) * <floating>sqrt(beta)):
                        continue
                    rotated = True
                    zeta = (beta - alpha) / (two * gamma)
                    t = <floating>copysign(one, zeta) / (<floating>fabs(zeta) + <floating>sqrt(one + zeta * zeta))
                    c = one / <floating>sqrt(one + t * t)
                    s = c * t
                    for r in range(m):
                        gi = G[r, i]
                        gj = G[r, j]
                        G[r, i] = c * gi - s * gj
                        G[r, j] = s * gi + c * gj
                    for r in range(nv):
                        gi = V[r, i]
                        gj = V[r, j]
                        V[r, i] = c * gi - s * gj
                        V[r, j] = s * gi + c * gj
            if not rotated:
                used = sweep
                break
    return used
