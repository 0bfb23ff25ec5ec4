"""Derivative-free minimisation by the Nelder-Mead simplex method."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

# standard coefficients
REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5


class NelderMeadResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0,
    max_iter: int = 500,
    tol: float = 1e-8,
    xtol: float = 1e-6,
    step: float = None,
) -> NelderMeadResult:
    """Minimise ``f`` from ``x0`` with the Nelder-Mead simplex.

    Parameters
    ----------
    f : callable
        Objective; may return ``inf`` to reject a point.
    x0 : array_like
        Starting point (k-vector).
    max_iter : int
        Iteration cap.  Reaching it returns the best vertex with
        ``converged=False`` instead of raising.
    tol : float
        Stop when the population standard deviation of the ``k + 1``
        vertex values drops below ``tol`` and every vertex lies within
        ``xtol`` (max-norm) of the best one.
    xtol : float or None
        Simplex size test; ``None`` disables it.  Without it a simplex
        straddling a symmetric minimum (equal values, large spread) would
        be reported as converged.
    step : float, optional
        Edge length of the initial simplex.  Defaults to ``0.1 * max|x0|``
        (or 0.1 when ``x0`` is zero).

    Returns
    -------
    NelderMeadResult
        Best point, its value, iterations, evaluations and a converged flag.

    Notes
    -----
    Vertices are ordered with a stable sort, so ties keep their insertion
    order and the run is fully deterministic.
    """
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    k = x0.size
    if step is None:
        scale = float(np.max(np.abs(x0))) if k else 0.0
        step = 0.1 * scale if scale > 0 else 0.1

    evals = 0

    def fx(x):
        nonlocal evals
        evals += 1
        v = float(f(x))
        return v if np.isfinite(v) else np.inf

    simplex = [x0.copy()]
    for i in range(k):
        v = x0.copy()
        v[i] += step
        simplex.append(v)
    simplex = np.array(simplex)
    fvals = np.array([fx(v) for v in simplex])
    if not np.isfinite(fvals[0]):
        raise ValueError("objective is not finite at the starting point")

    it = 0
    converged = False
    while True:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if np.all(np.isfinite(fvals)) and float(np.std(fvals)) < tol:
            size = float(np.max(np.abs(simplex[1:] - simplex[0]))) if k else 0.0
            if xtol is None or size <= xtol:
                converged = True
                break
        if it >= max_iter:
            break
        it += 1

        best, worst = simplex[0], simplex[-1]
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + REFLECT * (centroid - worst)
        fr = fx(xr)
        if fr < fvals[0]:
            xe = centroid + EXPAND * (centroid - worst)
            fe = fx(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
            fc = fx(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + CONTRACT * (worst - centroid)
            fc = fx(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        for i in range(1, k + 1):
            simplex[i] = best + SHRINK * (simplex[i] - best)
            fvals[i] = fx(simplex[i])

    return NelderMeadResult(simplex[0].copy(), float(fvals[0]), it, evals, converged)
