"""Gaussian log-likelihood and Matérn maximum likelihood estimation."""

from __future__ import annotations

import math
import time
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ..array import MPArray, diag, ew_unary, from_doubles, from_numpy, reduce, transpose
from ..errors import NotPositiveDefinite
from ..linalg import chol, forwardsolve
from ..precision import Precision, parse_precision
from .optim import nelder_mead
from .spatial import MaternParams, matern_values

BASE_JITTER = 1e-6
MAX_JITTER = 1e-3
LOG_2PI = math.log(2.0 * math.pi)


def _as_vector(z, p):
    if isinstance(z, MPArray):
        return z if z.precision is p else z.astype(p)
    return from_doubles(np.asarray(z, dtype=np.float64).ravel(), precision=p)


def _factor(V: np.ndarray, p: Precision):
    """Cholesky of ``V`` at precision ``p`` with the reduced-precision jitter policy.

    Below double, ``BASE_JITTER`` is added to the diagonal (in double, before
    rounding) and multiplied by 10 after each failure up to ``MAX_JITTER``.
    Returns the factor and the jitter used.
    """
    if p is Precision.DOUBLE:
        return chol(from_numpy(V, p)), 0.0
    jitter = BASE_JITTER
    while True:
        Vj = V.copy()
        Vj[np.diag_indices_from(Vj)] += jitter
        try:
            return chol(from_numpy(Vj, p)), jitter
        except NotPositiveDefinite:
            jitter *= 10.0
            if jitter > MAX_JITTER * (1 + 1e-9):
                raise


def gaussian_nll(z, cov_builder: Callable, theta, precision=Precision.DOUBLE) -> float:
    """Negative Gaussian log-likelihood ``0.5 quad + 0.5 log|V| + 0.5 n log(2 pi)``.

    Parameters
    ----------
    z : array_like or MPArray
        Observations (n-vector).
    cov_builder : callable
        ``cov_builder(theta)`` returns the n x n covariance in double.
    theta
        Passed through to ``cov_builder``.
    precision : Precision or str
        Working precision of the factorisation and solve.

    Returns
    -------
    float
        The negative log-likelihood; log-determinant and quadratic form are
        accumulated in double from the reduced-precision factor.
    """
    p = parse_precision(precision)
    V = np.asarray(cov_builder(theta), dtype=np.float64)
    n = V.shape[0]
    U, _ = _factor(V, p)
    log_det = 2.0 * reduce("sum", ew_unary("log", diag(U)))
    w = forwardsolve(transpose(U), _as_vector(z, p))
    quad = reduce("square_sum", w)
    return 0.5 * quad + 0.5 * log_det + 0.5 * n * LOG_2PI


class MleResult(NamedTuple):
    theta: tuple  # (sigma2, a, nu), the reporting order of the MLE table
    nll: float
    iterations: int
    evaluations: int
    converged: bool
    elapsed: float
    params: np.ndarray  # optimum in (log a, log sigma2)


DEFAULT_INIT = (math.log(0.1), math.log(0.5))


def matern_mle(
    z,
    D,
    precision=Precision.DOUBLE,
    init: Sequence[float] = DEFAULT_INIT,
    nu: float = 0.5,
    tol: float = 1e-2,
    xtol: float = 1e-2,
    max_iter: int = 1000,
) -> MleResult:
    """Fit (a, sigma2) of a Matérn field with fixed ``nu`` by Nelder-Mead.

    The search runs over ``(log a, log sigma2)``; both are mapped back with
    ``exp``.  The default tolerances (0.01 on the spread of vertex
    log-likelihoods, 0.01 on the log-parameter simplex) are far below the
    statistical resolution of the likelihood and well above the rounding
    noise of a single-precision evaluation, so runs at different precisions
    follow the same simplex path.  Points where the factorisation fails even after jitter
    escalation score ``inf`` so the simplex steps away from them.
    """
    p = parse_precision(precision)
    D = np.asarray(D, dtype=np.float64)
    zp = _as_vector(z, p)

    def build(pars):
        return matern_values(D, MaternParams(nu, math.exp(pars[0]), math.exp(pars[1])))

    def objective(pars):
        try:
            return gaussian_nll(zp, build, pars, p)
        except NotPositiveDefinite:
            return math.inf

    t0 = time.perf_counter()
    fit = nelder_mead(objective, np.asarray(init, dtype=np.float64), max_iter=max_iter, tol=tol, xtol=xtol)
    elapsed = time.perf_counter() - t0
    a_hat, s2_hat = math.exp(fit.x[0]), math.exp(fit.x[1])
    return MleResult((s2_hat, a_hat, nu), fit.fun, fit.iterations, fit.evaluations, fit.converged, elapsed, fit.x)
