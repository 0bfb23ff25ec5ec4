"""Laplace approximation of the posterior of a covariance range parameter.

Latent field ``x ~ N(0, sigma exp(-D/alpha))`` with Bernoulli observations
``y_i ~ Bern(logistic(beta x_i))``.  For each alpha on a grid the latent
mode is found by Newton iteration, and the Laplace approximation

    sum(beta x0 y - log(1 + exp(beta x0))) + 0.5 log|Q| - 0.5 x0'Q x0 - 0.5 log|H|

with ``Q`` the prior precision and ``H = Q + diag(beta^2 p (1 - p))`` is
normalised over the grid with Simpson's rule.
"""

from __future__ import annotations

import time
from typing import NamedTuple

import numpy as np

from ..array import MPArray, diag, diag_from, ew_unary, from_doubles, from_numpy, reduce
from ..errors import InvalidParam, NoConvergence
from ..linalg import chol, matmul, solve
from ..precision import Precision, parse_precision
from .rng import Rng
from .spatial import distance_matrix

ALPHA_TRUE = 0.6
SIGMA = 0.1
BETA = 10.0
MAX_NEWTON = 200


def logistic(v):
    """Overflow-free ``exp(v) / (1 + exp(v))``."""
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


class LaplaceData(NamedTuple):
    D: np.ndarray
    y: np.ndarray
    x: np.ndarray
    locs: np.ndarray


def generate_data(n: int, alpha: float = ALPHA_TRUE, sigma: float = SIGMA, beta: float = BETA, seed: int = 4) -> LaplaceData:
    """Points ``linspace(0, n, n)`` on a line, latent ``x = t(U) eps``, binary ``y``.

    ``U`` is the double-precision Cholesky factor of ``sigma exp(-D/alpha)``.
    """
    rng = Rng(seed)
    locs = np.linspace(0.0, float(n), int(n))
    D = distance_matrix(locs)
    U = chol(from_numpy(sigma * np.exp(-D / alpha))).to_numpy()
    x = rng.normal(n) @ U
    y = rng.bernoulli(logistic(beta * x))
    return LaplaceData(D, y, x, locs)


class LaplaceState(NamedTuple):
    Q: MPArray
    x0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    H: MPArray
    iterations: int


def precision_matrix(D, alpha: float, sigma: float = SIGMA, precision=Precision.DOUBLE) -> MPArray:
    """``Q = solve(sigma exp(-D/alpha))`` at ``precision``."""
    p = parse_precision(precision)
    return solve(from_numpy(sigma * np.exp(-np.asarray(D) / alpha), p))


def _gradients(x, y, beta):
    pr = logistic(beta * x)
    g1 = beta * y - beta * pr
    g2 = -beta * beta * pr * (1.0 - pr)
    return g1, g2


def laplace_mode(Q: MPArray, y, beta: float = BETA, tol: float = 1e-12, max_iter: int = MAX_NEWTON):
    """Newton iteration ``x <- (Q - diag(g2))^{-1} (g1 - x g2)`` from ``x = 0``.

    Stops when the mean squared update is below ``tol``.

    Returns
    -------
    (ndarray, int)
        Mode in double and the number of Newton steps.

    Raises
    ------
    NoConvergence
        After ``max_iter`` steps.
    """
    p = Q.precision
    y = np.asarray(y, dtype=np.float64)
    x0 = np.zeros(Q.nrow)
    for it in range(1, max_iter + 1):
        g1, g2 = _gradients(x0, y, beta)
        A = Q - diag_from(from_doubles(g2, precision=p))
        rhs = from_doubles(g1 - x0 * g2, precision=p)
        x = solve(A, rhs).to_doubles()
        if np.mean((x - x0) ** 2) < tol:
            return x, it
        x0 = x
    raise NoConvergence(f"Newton iteration for the latent mode did not converge in {max_iter} steps")


def laplace_state(alpha, D, y, sigma=SIGMA, beta=BETA, precision=Precision.DOUBLE) -> LaplaceState:
    p = parse_precision(precision)
    Q = precision_matrix(D, alpha, sigma, p)
    x0, its = laplace_mode(Q, y, beta)
    g1, g2 = _gradients(x0, np.asarray(y, dtype=np.float64), beta)
    H = Q + diag_from(from_doubles(-g2, precision=p))
    return LaplaceState(Q, x0, g1, g2, H, its)


def _logdet(U: MPArray) -> float:
    return 2.0 * reduce("sum", ew_unary("log", diag(U)))


def laplace_log_posterior(alpha, D, y, sigma=SIGMA, beta=BETA, precision=Precision.DOUBLE) -> float:
    """Laplace-approximated log posterior of ``alpha`` (flat prior, up to a constant)."""
    st = laplace_state(alpha, D, y, sigma, beta, precision)
    p = st.Q.precision
    UQ = chol(st.Q)
    UH = chol(st.H)
    quad = reduce("square_sum", matmul(UQ, from_doubles(st.x0, precision=p)))
    y = np.asarray(y, dtype=np.float64)
    bx = beta * st.x0
    lik = float(np.sum(bx * y - np.logaddexp(0.0, bx)))
    return lik + 0.5 * _logdet(UQ) - 0.5 * quad - 0.5 * _logdet(UH)


def simpson_weights(m: int) -> np.ndarray:
    """Composite Simpson weights 1, 4, 2, ..., 2, 4, 1 for ``m`` (odd) points."""
    if m < 3 or m % 2 == 0:
        raise InvalidParam(f"Simpson's rule needs an odd number of points >= 3, got {m}")
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def simpson(values, h: float) -> float:
    values = np.asarray(values, dtype=np.float64)
    return float(np.sum(simpson_weights(values.size) * values) * h / 3.0)


def default_grid() -> np.ndarray:
    return np.linspace(0.05, 0.95, 21)


class PosteriorResult(NamedTuple):
    alpha: np.ndarray
    posterior: np.ndarray
    lpost: np.ndarray
    elapsed: float


def normalize_posterior(alpha, lpost):
    """Center ``lpost`` on its mean, exponentiate and divide by the Simpson integral."""
    alpha = np.asarray(alpha, dtype=np.float64)
    lp = np.asarray(lpost, dtype=np.float64)
    lp = lp - lp.mean()
    h = alpha[1] - alpha[0]
    if not np.allclose(np.diff(alpha), h, rtol=1e-9, atol=0):
        raise InvalidParam("alpha grid must be uniformly spaced")
    Z = simpson(np.exp(lp), h)
    return np.exp(lp) / Z


def posterior_grid(D, y, precision=Precision.DOUBLE, grid=None, sigma=SIGMA, beta=BETA) -> PosteriorResult:
    """Normalised Laplace posterior of ``alpha`` over an odd, uniform grid."""
    alpha = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    simpson_weights(alpha.size)
    t0 = time.perf_counter()
    lpost = np.array([laplace_log_posterior(a, D, y, sigma, beta, precision) for a in alpha])
    elapsed = time.perf_counter() - t0
    return PosteriorResult(alpha, normalize_posterior(alpha, lpost), lpost, elapsed)
