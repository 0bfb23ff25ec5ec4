"""Dense linear algebra at each array's storage precision.

All kernels run through the dispatcher: operands are widened exactly to the
output precision's compute dtype (single for half), the homogeneous kernel
runs, and results are rounded back to storage.  The heavy loops live in the
active backend (compiled extension or numpy fallback); both accumulate in a
fixed order so results are bit-identical across backends and thread counts.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _backend
from .array import MPArray
from .dispatch import execute, register, resolve
from .errors import (
    InvalidParam,
    NoConvergence,
    NotAMatrix,
    NotPositiveDefinite,
    PrecisionMismatch,
    ShapeMismatch,
    SingularMatrix,
)
from .precision import promote

__all__ = [
    "SvdResult",
    "matmul",
    "crossprod",
    "gemm",
    "chol",
    "chol2inv",
    "forwardsolve",
    "backsolve",
    "trsm",
    "solve",
    "svd",
    "SVD_MAX_SWEEPS",
]

SVD_MAX_SWEEPS = 30


class SvdResult(NamedTuple):
    d: MPArray
    u: MPArray
    v: MPArray


def _k():
    return _backend.kernels()


def _nt():
    return _backend.get_num_threads()


def _f(x):
    return np.asfortranarray(x)


def _eye(n, dtype):
    return np.eye(n, dtype=dtype, order="F")


def _mm(A, B):
    """Fresh ``A @ B`` through the backend kernel."""
    C = np.zeros((A.shape[0], B.shape[1]), dtype=A.dtype, order="F")
    _k().gemm_nn(_f(A), _f(B), C, _nt())
    return C


def _require_matrix(a, name):
    if not a.is_matrix:
        raise NotAMatrix(f"{name} expects a matrix")


def _require_square(a, name):
    _require_matrix(a, name)
    if a.nrow != a.ncol:
        raise ShapeMismatch(f"{name} expects a square matrix, got {a.nrow}x{a.ncol}")


def _check_diag(T):
    d = np.diagonal(T)
    zero = np.flatnonzero(d == 0)
    if zero.size:
        raise SingularMatrix(int(zero[0]))


# ---------------------------------------------------------------------------
# multiplication


@register("matmul")
def _matmul_kernel(A, B, nthreads=1):
    C = np.zeros((A.shape[0], B.shape[1]), dtype=A.dtype, order="F")
    _k().gemm_nn(A, B, C, nthreads)
    return C


@register("crossprod")
def _crossprod_kernel(A, B, nthreads=1):
    At = _f(A.T)
    C = np.zeros((At.shape[0], B.shape[1]), dtype=A.dtype, order="F")
    _k().gemm_nn(At, B, C, nthreads)
    return C


@register("crossprod_self", arity=1)
def _crossprod_self_kernel(A, nthreads=1):
    return _crossprod_kernel(A, A, nthreads)


def matmul(A: MPArray, B: MPArray) -> MPArray:
    """Matrix product ``A @ B`` in the promoted precision.

    Vectors are treated as single columns.
    """
    A2, B2 = A.as_column(), B.as_column()
    if A2.ncol != B2.nrow:
        raise ShapeMismatch(f"matmul: {A2.nrow}x{A2.ncol} times {B2.nrow}x{B2.ncol}")
    key = resolve("matmul", A.precision, B.precision)
    return execute(key, "matmul", A2, B2, nthreads=_nt())


def crossprod(A: MPArray, B: MPArray = None) -> MPArray:
    """``t(A) @ A`` or ``t(A) @ B``.

    The single-argument form is exactly symmetric: entries (i, j) and (j, i)
    accumulate the same products in the same order.
    """
    A2 = A.as_column()
    if B is None:
        key = resolve("crossprod_self", A.precision)
        return execute(key, "crossprod_self", A2, nthreads=_nt())
    B2 = B.as_column()
    if A2.nrow != B2.nrow:
        raise ShapeMismatch(f"crossprod: row counts {A2.nrow} and {B2.nrow} differ")
    key = resolve("crossprod", A.precision, B.precision)
    return execute(key, "crossprod", A2, B2, nthreads=_nt())


@register("gemm", widen_out=True)
def _gemm_kernel(A, B, C, trans_a=False, trans_b=False, alpha=1.0, beta=0.0, nthreads=1):
    t = C.dtype.type
    opA = _f(A.T) if trans_a else A
    opB = _f(B.T) if trans_b else B
    T = np.zeros(C.shape, dtype=C.dtype, order="F")
    _k().gemm_nn(opA, opB, T, nthreads)
    with np.errstate(all="ignore"):
        if alpha != 1.0:
            T = t(alpha) * T
        if beta != 0.0:
            T = T + t(beta) * C
    return T


def gemm(
    A: MPArray,
    B: MPArray,
    C: MPArray,
    trans_a: bool = False,
    trans_b: bool = False,
    alpha: float = 1.0,
    beta: float = 0.0,
) -> MPArray:
    """General multiply ``C <- alpha * op(A) @ op(B) + beta * C``, overwriting ``C``.

    The product is accumulated in ``C``'s precision, which must be at least
    the promoted precision of ``A`` and ``B``.  With ``beta == 0`` the old
    contents of ``C`` are not read (NaNs in C do not propagate).

    Returns
    -------
    MPArray
        ``C`` itself, for chaining.
    """
    _require_matrix(C, "gemm")
    A2, B2 = A.as_column(), B.as_column()
    m, ka = (A2.ncol, A2.nrow) if trans_a else (A2.nrow, A2.ncol)
    kb, n = (B2.ncol, B2.nrow) if trans_b else (B2.nrow, B2.ncol)
    if ka != kb or C.shape != (m, n):
        raise ShapeMismatch(
            f"gemm: op(A) is {m}x{ka}, op(B) is {kb}x{n}, C is {C.nrow}x{C.ncol}"
        )
    join = promote(A.precision, B.precision)
    if C.precision < join:
        raise PrecisionMismatch(
            f"gemm: C is {C.precision.label} but inputs promote to {join.label}"
        )
    from .dispatch import KernelKey

    key = KernelKey(A.precision, B.precision, C.precision)
    if beta == 0.0:
        Cin = MPArray._from_storage(np.zeros(C.shape, dtype=C._data.dtype, order="F"), C.precision, C.placement)
    else:
        Cin = C
    out = execute(
        key, "gemm", A2, B2, Cin,
        trans_a=trans_a, trans_b=trans_b, alpha=float(alpha), beta=float(beta), nthreads=_nt(),
    )
    C._data = out._data
    return C


# ---------------------------------------------------------------------------
# Cholesky


@register("chol", arity=1)
def _chol_kernel(A, nthreads=1):
    U = A.copy(order="F")
    info = _k().chol_upper(U, nthreads)
    if info >= 0:
        raise NotPositiveDefinite(int(info))
    return U


def chol(A: MPArray) -> MPArray:
    """Upper-triangular Cholesky factor ``U`` with ``A = t(U) @ U``.

    Only the upper triangle of ``A`` is read.

    Raises
    ------
    NotPositiveDefinite
        With ``.column`` set to the first (0-based) non-positive pivot.
    """
    _require_square(A, "chol")
    return execute(resolve("chol", A.precision), "chol", A, nthreads=_nt())


@register("chol2inv", arity=1)
def _chol2inv_kernel(U, nthreads=1):
    _check_diag(U)
    n = U.shape[0]
    Uinv = _eye(n, U.dtype)
    _k().trsm_upper(U, Uinv, False, nthreads)
    X = np.zeros((n, n), dtype=U.dtype, order="F")
    _k().gemm_nn(Uinv, _f(Uinv.T), X, nthreads)
    return X


def chol2inv(U: MPArray) -> MPArray:
    """Inverse of ``t(U) @ U`` from its Cholesky factor; exactly symmetric."""
    _require_square(U, "chol2inv")
    return execute(resolve("chol2inv", U.precision), "chol2inv", U, nthreads=_nt())


# ---------------------------------------------------------------------------
# triangular solves


def _tri_solve(T, B, lower, trans, nthreads):
    """Solve op(T) X = B with op(T) = T or t(T); B is overwritten."""
    if trans:
        T = _f(T.T)
        lower = not lower
    if lower:
        _k().trsm_lower(T, B, False, nthreads)
    else:
        _k().trsm_upper(T, B, False, nthreads)
    return B


@register("forwardsolve")
def _forwardsolve_kernel(L, B, nthreads=1):
    _check_diag(L)
    return _tri_solve(L, B.copy(order="F"), True, False, nthreads)


@register("backsolve")
def _backsolve_kernel(U, B, nthreads=1):
    _check_diag(U)
    return _tri_solve(U, B.copy(order="F"), False, False, nthreads)


def _solve_rhs(name, T, B):
    _require_square(T, name)
    B2 = B.as_column()
    if B2.nrow != T.nrow:
        raise ShapeMismatch(f"{name}: system has {T.nrow} rows, right-hand side has {B2.nrow}")
    key = resolve(name, T.precision, B.precision)
    X = execute(key, name, T, B2, nthreads=_nt())
    return X if B.is_matrix else X.to_vector()


def forwardsolve(L: MPArray, B: MPArray) -> MPArray:
    """Solve ``L X = B`` by forward substitution (strict upper part of L is ignored)."""
    return _solve_rhs("forwardsolve", L, B)


def backsolve(U: MPArray, B: MPArray) -> MPArray:
    """Solve ``U X = B`` by back substitution (strict lower part of U is ignored)."""
    return _solve_rhs("backsolve", U, B)


@register("trsm")
def _trsm_kernel(A, B, side="left", upper=False, trans=False, alpha=1.0, nthreads=1):
    _check_diag(A)
    t = B.dtype.type
    if side == "left":
        X = B.copy(order="F")
        if alpha != 1.0:
            X = _f(t(alpha) * X)
        return _tri_solve(A, X, not upper, trans, nthreads)
    # X op(A) = alpha B  <=>  t(op(A)) t(X) = alpha t(B)
    At = _f(A.T)
    Y = _f(B.T)
    if alpha != 1.0:
        Y = _f(t(alpha) * Y)
    _tri_solve(At, Y, upper, trans, nthreads)
    return _f(Y.T)


def trsm(
    A: MPArray,
    B: MPArray,
    side: str = "left",
    upper: bool = False,
    trans: bool = False,
    alpha: float = 1.0,
) -> MPArray:
    """General triangular solve, overwriting ``B`` with ``X``.

    Solves ``op(A) X = alpha B`` (side "left") or ``X op(A) = alpha B``
    (side "right") where ``op(A)`` is ``A`` or ``t(A)``.  ``B`` takes the
    promoted precision of ``A`` and ``B``.
    """
    side = side.lower()
    if side not in ("left", "right"):
        raise InvalidParam("side must be 'left' or 'right'")
    _require_square(A, "trsm")
    _require_matrix(B, "trsm")
    need = B.nrow if side == "left" else B.ncol
    if need != A.nrow:
        raise ShapeMismatch(f"trsm: A is {A.nrow}x{A.ncol}, B is {B.nrow}x{B.ncol} (side {side})")
    key = resolve("trsm", A.precision, B.precision)
    X = execute(
        key, "trsm", A, B,
        side=side, upper=bool(upper), trans=bool(trans), alpha=float(alpha), nthreads=_nt(),
    )
    B._data = X._data
    B.precision = X.precision
    return B


# ---------------------------------------------------------------------------
# general solve


def _lu_solve(A, B, nthreads):
    LU = A.copy(order="F")
    n = LU.shape[0]
    piv = np.zeros(n, dtype=np.intp)
    info = _k().lu_factor(LU, piv, nthreads)
    if info >= 0:
        raise SingularMatrix(int(info))
    X = B.copy(order="F")
    for k in range(n):
        p = piv[k]
        if p != k:
            X[[k, p], :] = X[[p, k], :]
    _k().trsm_lower(LU, X, True, nthreads)
    _k().trsm_upper(LU, X, False, nthreads)
    return X


def _solve_core(A, B, nthreads):
    """SPD fast path when A is exactly symmetric and Cholesky succeeds, else LU."""
    if np.array_equal(A, A.T):
        U = A.copy(order="F")
        if _k().chol_upper(U, nthreads) < 0:
            if B is None:
                return _chol2inv_kernel(U, nthreads)
            X = B.copy(order="F")
            _tri_solve(U, X, False, True, nthreads)
            _k().trsm_upper(U, X, False, nthreads)
            return X
    if B is None:
        B = _eye(A.shape[0], A.dtype)
    return _lu_solve(A, B, nthreads)


@register("solve")
def _solve_kernel(A, B, nthreads=1):
    return _solve_core(A, B, nthreads)


@register("inverse", arity=1)
def _inverse_kernel(A, nthreads=1):
    return _solve_core(A, None, nthreads)


def solve(A: MPArray, B: MPArray = None) -> MPArray:
    """Solve ``A X = B``; without ``B`` return the inverse of ``A``.

    Exactly symmetric matrices are tried with Cholesky first (falling back
    to LU if it fails); everything else uses LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        When a zero pivot remains after pivoting.
    """
    _require_square(A, "solve")
    if B is None:
        return execute(resolve("inverse", A.precision), "inverse", A, nthreads=_nt())
    B2 = B.as_column()
    if B2.nrow != A.nrow:
        raise ShapeMismatch(f"solve: A is {A.nrow}x{A.ncol}, B has {B2.nrow} rows")
    X = execute(resolve("solve", A.precision, B.precision), "solve", A, B2, nthreads=_nt())
    return X if B.is_matrix else X.to_vector()


# ---------------------------------------------------------------------------
# SVD (one-sided Jacobi)


def _complete_basis(Q, cols):
    """Replace columns ``cols`` of Q by an orthonormal completion.

    Candidates are the unit vectors e_0, e_1, ... in order, orthogonalized
    twice against the accepted columns; the first candidate keeping more
    than half its norm is taken.  Deterministic and backend independent.
    """
    k = _k()
    m = Q.shape[0]
    t = Q.dtype.type
    good = [j for j in range(Q.shape[1]) if j not in set(cols)]
    nxt = 0
    for j in cols:
        while True:
            if nxt >= m:
                raise NoConvergence("could not complete the singular vector basis")
            x = np.zeros((m, 1), dtype=Q.dtype, order="F")
            x[nxt, 0] = 1
            nxt += 1
            B = _f(Q[:, good])
            for _ in range(2):
                if not good:
                    break
                c = _mm(_f(B.T), x)
                x = _f(x - _mm(B, c))
            nrm = np.sqrt(k.col_sumsq(x)[0])
            if nrm > t(0.5):
                Q[:, j] = x[:, 0] / nrm
                good.append(j)
                break
    return Q


@register("svd", arity=1)
def _svd_kernel(A, nu, nv, nthreads=1):
    k = _k()
    m, n = A.shape
    transposed = m < n
    G = _f(A.T) if transposed else A.copy(order="F")
    mm, nn = G.shape
    dtype = G.dtype
    t = dtype.type
    u = np.finfo(dtype).eps / 2
    V = _eye(nn, dtype)
    if nn > 0 and mm > 0:
        fro2 = k.seq_sum(k.col_sumsq(G).astype(np.float64))
        tol = t(10 * u)
        skip2 = t((mm * u) ** 2 * fro2)
        sweeps = k.jacobi_sweeps(G, V, tol, skip2, SVD_MAX_SWEEPS)
        if sweeps < 0:
            raise NoConvergence(f"Jacobi SVD did not converge in {SVD_MAX_SWEEPS} sweeps")
    else:
        fro2 = 0.0
    d = np.sqrt(k.col_sumsq(G)) if mm > 0 else np.zeros(nn, dtype=dtype)
    order = np.argsort(-d, kind="stable")
    d = d[order]
    G = _f(G[:, order])
    V = _f(V[:, order])
    thresh = mm * u * np.sqrt(fro2)
    Uw = np.zeros((mm, nn), dtype=dtype, order="F")
    small = []
    for j in range(nn):
        if d[j] > thresh and d[j] > 0:
            Uw[:, j] = G[:, j] / d[j]
        else:
            small.append(j)
    if small:
        _complete_basis(Uw, small)
    left, right = (V, Uw) if transposed else (Uw, V)
    return d, _f(left[:, :nu]), _f(right[:, :nv])


def svd(A: MPArray, nu: int = -1, nv: int = -1) -> SvdResult:
    """Singular value decomposition ``A = U diag(d) t(V)`` by one-sided Jacobi.

    Parameters
    ----------
    A : MPArray
        ``m x n`` matrix.
    nu, nv : int
        Number of left/right singular vectors to return, in
        ``[0, min(m, n)]``; ``-1`` means ``min(m, n)``.

    Returns
    -------
    SvdResult
        ``d`` in non-increasing order, ``u`` (m x nu) and ``v`` (n x nv), all
        in ``A``'s precision.  Half input is computed in single.

    Raises
    ------
    NoConvergence
        If the rotations have not settled after ``SVD_MAX_SWEEPS`` sweeps.
    """
    _require_matrix(A, "svd")
    r = min(A.shape)
    nu = r if nu == -1 else nu
    nv = r if nv == -1 else nv
    for name, val in (("nu", nu), ("nv", nv)):
        if not 0 <= val <= r:
            raise InvalidParam(f"{name} must be -1 or in [0, {r}], got {val}")
    d, u, v = execute(resolve("svd", A.precision), "svd", A, nu=nu, nv=nv, nthreads=_nt())
    return SvdResult(d, u, v)
