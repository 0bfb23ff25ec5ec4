"""Independent reference implementations used as test oracles.

Everything here is deliberately naive: plain Python loops over lists,
exact rational arithmetic where rounding matters, no shared code with the
library kernels.
"""

import bisect
import math
import struct
from fractions import Fraction


# -- binary16 ---------------------------------------------------------------

def decode_half_fields(bits):
    """Decode a binary16 pattern from its fields (no table, no numpy)."""
    sign = -1.0 if bits >> 15 else 1.0
    e = (bits >> 10) & 0x1F
    f = bits & 0x3FF
    if e == 0x1F:
        return sign * math.inf if f == 0 else math.nan
    if e == 0:
        return sign * f * 2.0 ** -24
    return sign * (1 + f / 1024) * 2.0 ** (e - 15)


# all finite non-negative halves, ascending, with their patterns
_POS = sorted((decode_half_fields(b), b) for b in range(0x7C00))
_POS_VALUES = [v for v, _ in _POS]


def nearest_even_half(x):
    """Correctly rounded binary16 pattern of double ``x`` by brute-force search.

    Uses exact rationals for the distance comparison.  Overflow follows
    IEEE: values at or beyond max + half an ulp (65520) round to infinity.
    """
    if math.isnan(x):
        return 0x7E00
    sign = 0x8000 if math.copysign(1.0, x) < 0 else 0
    ax = abs(x)
    if ax >= 65520.0:
        return sign | 0x7C00
    i = bisect.bisect_left(_POS_VALUES, ax)
    if i < len(_POS) and _POS_VALUES[i] == ax:
        return sign | _POS[i][1]
    lo_v, lo_b = _POS[i - 1]
    hi_v, hi_b = _POS[i] if i < len(_POS) else (65536.0, 0x7C00)
    fx = Fraction(ax)
    dlo, dhi = fx - Fraction(lo_v), Fraction(hi_v) - fx
    if dlo < dhi:
        pick = lo_b
    elif dhi < dlo:
        pick = hi_b
    else:
        pick = lo_b if lo_b % 2 == 0 else hi_b
    return sign | pick


def to_single(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


# -- dense linear algebra on lists of lists ---------------------------------

def tolist(M):
    return [list(map(float, row)) for row in M]


def matmul(A, B):
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)] if A else []


def cholesky_upper(A):
    """Cholesky-Banachiewicz, returning U with A = U'U."""
    n = len(A)
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = sum(L[i][k] * L[j][k] for k in range(j))
            if i == j:
                v = A[i][i] - s
                if v <= 0:
                    raise ArithmeticError(i)
                L[i][j] = math.sqrt(v)
            else:
                L[i][j] = (A[i][j] - s) / L[j][j]
    return transpose(L)


def forward_sub(L, B):
    n, m = len(L), len(B[0])
    X = [[0.0] * m for _ in range(n)]
    for c in range(m):
        for i in range(n):
            X[i][c] = (B[i][c] - sum(L[i][k] * X[k][c] for k in range(i))) / L[i][i]
    return X


def back_sub(U, B):
    n, m = len(U), len(B[0])
    X = [[0.0] * m for _ in range(n)]
    for c in range(m):
        for i in reversed(range(n)):
            X[i][c] = (B[i][c] - sum(U[i][k] * X[k][c] for k in range(i + 1, n))) / U[i][i]
    return X


def gauss_solve(A, B):
    """Gaussian elimination with partial pivoting on an augmented copy."""
    n, m = len(A), len(B[0])
    M = [list(A[i]) + list(B[i]) for i in range(n)]
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(M[r][k]))
        M[k], M[p] = M[p], M[k]
        if M[k][k] == 0:
            raise ArithmeticError(k)
        for r in range(k + 1, n):
            f = M[r][k] / M[k][k]
            for c in range(k, n + m):
                M[r][c] -= f * M[k][c]
    U = [row[:n] for row in M]
    Y = [row[n:] for row in M]
    return back_sub(U, Y)


def jacobi_singular_values(A, sweeps=60):
    """Textbook one-sided Jacobi on columns; returns sorted singular values."""
    G = [list(r) for r in A]
    m, n = len(G), len(G[0])
    if m < n:
        G = transpose(G)
        m, n = n, m
    for _ in range(sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = sum(G[r][i] ** 2 for r in range(m))
                b = sum(G[r][j] ** 2 for r in range(m))
                g = sum(G[r][i] * G[r][j] for r in range(m))
                if a == 0 or b == 0:
                    continue
                off = max(off, abs(g) / math.sqrt(a * b))
                if g == 0:
                    continue
                z = (b - a) / (2 * g)
                t = math.copysign(1.0, z) / (abs(z) + math.sqrt(1 + z * z))
                c = 1 / math.sqrt(1 + t * t)
                s = c * t
                for r in range(m):
                    gi, gj = G[r][i], G[r][j]
                    G[r][i], G[r][j] = c * gi - s * gj, s * gi + c * gj
        if off < 1e-15:
            break
    return sorted((math.sqrt(sum(G[r][j] ** 2 for r in range(m))) for j in range(n)), reverse=True)


def frob(A):
    return math.sqrt(sum(v * v for row in A for v in row))


def rel_frob(X, R):
    diff = [[x - r for x, r in zip(rx, rr)] for rx, rr in zip(X, R)]
    d = frob(R)
    return frob(diff) / d if d else frob(diff)
