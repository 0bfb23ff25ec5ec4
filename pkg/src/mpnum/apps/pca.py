"""EOF / principal component analysis of a time x space data matrix."""

from __future__ import annotations

import time
from typing import NamedTuple, Optional

import numpy as np

from ..array import MPArray, diag_from, from_numpy
from ..errors import InvalidParam, ShapeMismatch
from ..linalg import matmul, svd
from ..precision import Precision, parse_precision
from .rng import Rng


class PcaResult(NamedTuple):
    eofs: np.ndarray  # n x k spatial patterns
    scores: np.ndarray  # t x k temporal amplitudes
    pct_var: np.ndarray  # k leading shares of total variance, in percent
    d: np.ndarray  # full singular value spectrum
    elapsed: float


def sign_align(eofs: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Flip columns of ``eofs`` so each has a non-negative inner product with ``reference``."""
    eofs = np.asarray(eofs, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if eofs.shape != reference.shape:
        raise ShapeMismatch(f"sign_align: shapes {eofs.shape} and {reference.shape} differ")
    signs = np.where(np.einsum("ij,ij->j", eofs, reference) < 0, -1.0, 1.0)
    return eofs * signs


def _canonical_signs(eofs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive (first on ties)
    idx = np.argmax(np.abs(eofs), axis=0)
    vals = eofs[idx, np.arange(eofs.shape[1])]
    return np.where(vals < 0, -1.0, 1.0)


def pca_eof(X, k: int, precision=Precision.DOUBLE, reference: Optional[np.ndarray] = None) -> PcaResult:
    """Leading ``k`` EOFs of ``X = U diag(d) t(V)`` (no centering).

    Parameters
    ----------
    X : array_like or MPArray
        ``t x n`` data, one row per time point.
    k : int
        Number of components.
    precision : Precision or str
        Precision of the SVD.
    reference : ndarray, optional
        ``n x k`` EOFs to align signs with.  Without it each EOF's
        largest-magnitude entry is made positive.

    Returns
    -------
    PcaResult
        ``pct_var`` is ``100 d_i^2 / sum(d^2)`` over the whole spectrum.
        Scores get the same sign flips as their EOFs.
    """
    p = parse_precision(precision)
    Xp = X.astype(p) if isinstance(X, MPArray) else from_numpy(np.asarray(X, dtype=np.float64), p)
    t, n = Xp.shape
    if not 1 <= k <= min(t, n):
        raise InvalidParam(f"k must be in [1, {min(t, n)}], got {k}")
    t0 = time.perf_counter()
    res = svd(Xp, nu=k, nv=k)
    d_full = res.d.to_doubles()
    dk = MPArray._from_storage(res.d._data[:k].copy(), p)
    scores = matmul(res.u, diag_from(dk)).to_numpy()
    elapsed = time.perf_counter() - t0
    eofs = res.v.to_numpy()
    d2 = d_full * d_full
    pct = 100.0 * d2[:k] / d2.sum()
    if reference is not None:
        signs = np.where(np.einsum("ij,ij->j", eofs, np.asarray(reference)) < 0, -1.0, 1.0)
    else:
        signs = _canonical_signs(eofs)
    return PcaResult(eofs * signs, scores * signs, pct, d_full, elapsed)


def synthetic_field(t: int, n: int, rank: int = 3, noise: float = 1.0, seed: int = 0) -> np.ndarray:
    """Low-rank-plus-noise space-time field ``sum_k s_k a_k b_k' + noise E``.

    Temporal amplitudes ``a_k`` and spatial patterns ``b_k`` are smooth
    sinusoids with random phases; mode strengths decay as ``s_k = 10 / k``.
    Noise is i.i.d. standard normal, scaled by ``noise``.
    """
    rng = Rng(seed)
    tt = np.arange(t) / t
    ss = np.arange(n) / n
    X = np.zeros((t, n))
    for j in range(1, rank + 1):
        ph_t, ph_s = 2 * np.pi * rng.uniform(2)
        a = np.sin(2 * np.pi * j * tt + ph_t)
        b = np.cos(2 * np.pi * j * ss + ph_s)
        X += (10.0 / j) * np.outer(a, b)
    X += noise * rng.normal(t * n).reshape((t, n), order="F")
    return X
