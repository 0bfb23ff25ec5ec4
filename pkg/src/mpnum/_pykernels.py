"""Pure numpy kernels, used when the compiled extension is unavailable.

Every kernel performs the same scalar operations, in the same order per
output element, as its counterpart in ``_ckernels.pyx``.  Only elementwise
numpy ufuncs and sequential ``cumsum`` are used (never BLAS or pairwise
reductions) so both backends agree bit for bit.

Matrices are 2-D Fortran-ordered float32/float64 arrays; ``nthreads`` is
accepted for signature compatibility and ignored.
"""

import numpy as np

NAME = "python"


def encode_f16(x):
    x = np.asarray(x, dtype=np.float64)
    b = x.view(np.uint64)
    sign = ((b >> np.uint64(63)) << np.uint64(15)).astype(np.uint32)
    exp = ((b >> np.uint64(52)) & np.uint64(0x7FF)).astype(np.int64)
    man = b & np.uint64((1 << 52) - 1)
    sig = man | np.uint64(1 << 52)
    e = exp - 1023

    normal = e >= -14
    shift = np.where(normal, 42, np.minimum(28 - e, 63)).astype(np.uint64)
    q = sig >> shift
    rem = sig & ((np.uint64(1) << shift) - np.uint64(1))
    half = np.uint64(1) << (shift - np.uint64(1))
    up = (rem > half) | ((rem == half) & ((q & np.uint64(1)) == np.uint64(1)))
    q = (q + up.astype(np.uint64)).astype(np.int64)
    base = np.where(normal, ((e + 15) << 10) - 1024, 0)
    out = (base + q).astype(np.uint32)

    out = np.where(exp == 0, 0, out)
    out = np.where((e > 15) & (exp != 0x7FF), 0x7C00, out)
    out = np.where((exp == 0x7FF) & (man == 0), 0x7C00, out)
    out = out | sign
    out = np.where((exp == 0x7FF) & (man != 0), 0x7E00, out)
    return out.astype(np.uint16)


def seq_sum(x):
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    return float(np.cumsum(x)[-1])


def col_sumsq(G):
    if G.shape[0] == 0:
        return np.zeros(G.shape[1], dtype=G.dtype)
    return np.cumsum(G * G, axis=0)[-1].copy()


def gemm_nn(A, B, C, nthreads=1):
    """C += A @ B, accumulating over the inner index in increasing order."""
    tmp = np.empty(C.shape, dtype=C.dtype, order="F")
    for k in range(A.shape[1]):
        np.multiply.outer(A[:, k], B[k, :], out=tmp)
        np.add(C, tmp, out=C)


def chol_upper(A, nthreads=1):
    """Right-looking Cholesky A = U^T U in place. Returns -1 or the failing column."""
    n = A.shape[0]
    for k in range(n):
        d = A[k, k]
        if not d > 0:
            return k
        r = np.sqrt(d)
        A[k, k] = r
        row = A[k, k + 1:] / r
        A[k, k + 1:] = row
        if k + 1 < n:
            A[k + 1:, k + 1:] -= np.multiply.outer(row, row)
    A[np.tril_indices(n, -1)] = 0
    return -1


def trsm_lower(L, B, unit=False, nthreads=1):
    """Solve L X = B in place by forward substitution."""
    n = L.shape[0]
    for k in range(n):
        if not unit:
            B[k, :] /= L[k, k]
        if k + 1 < n:
            B[k + 1:, :] -= np.multiply.outer(L[k + 1:, k], B[k, :])


def trsm_upper(U, B, unit=False, nthreads=1):
    """Solve U X = B in place by back substitution."""
    n = U.shape[0]
    for k in range(n - 1, -1, -1):
        if not unit:
            B[k, :] /= U[k, k]
        if k > 0:
            B[:k, :] -= np.multiply.outer(U[:k, k], B[k, :])


def lu_factor(A, piv, nthreads=1):
    """In-place LU with partial pivoting. Returns -1 or the zero-pivot column."""
    n = A.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        piv[k] = p
        if p != k:
            A[[k, p], :] = A[[p, k], :]
        pv = A[k, k]
        if pv == 0:
            return k
        if k + 1 < n:
            A[k + 1:, k] /= pv
            A[k + 1:, k + 1:] -= np.multiply.outer(A[k + 1:, k], A[k, k + 1:])
    return -1


def jacobi_sweeps(G, V, tol, skip2, max_sweeps):
    """One-sided cyclic Jacobi on the columns of G, accumulating rotations in V.

    Returns the number of sweeps used, or -1 without convergence.
    """
    t = G.dtype.type
    tol, skip2 = t(tol), t(skip2)
    one, two = t(1), t(2)
    n = G.shape[1]
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                gi = G[:, i].copy()
                gj = G[:, j].copy()
                alpha = np.cumsum(gi * gi)[-1]
                beta = np.cumsum(gj * gj)[-1]
                if alpha <= skip2 or beta <= skip2:
                    continue
                gamma = np.cumsum(gi * gj)[-1]
                if abs(gamma) <= tol * (np.sqrt(alpha) * np.sqrt(beta)):
                    continue
                rotated = True
                zeta = (beta - alpha) / (two * gamma)
                tt = np.copysign(one, zeta) / (abs(zeta) + np.sqrt(one + zeta * zeta))
                c = one / np.sqrt(one + tt * tt)
                s = c * tt
                G[:, i] = c * gi - s * gj
                G[:, j] = s * gi + c * gj
                vi = V[:, i].copy()
                vj = V[:, j].copy()
                V[:, i] = c * vi - s * vj
                V[:, j] = s * vi + c * vj
        if not rotated:
            return sweep
    return -1
