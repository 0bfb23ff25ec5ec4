"""Spatial grids, Matérn covariances and Gaussian field sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..array import MPArray, from_doubles, from_numpy, transpose
from ..errors import InvalidParam
from ..linalg import chol, matmul
from ..precision import Precision, parse_precision
from .rng import Rng

SUPPORTED_NU = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class MaternParams:
    """Matérn parameters (smoothness ``nu``, range ``a``, variance ``sigma2``)."""

    nu: float
    a: float
    sigma2: float

    def validate(self):
        if self.nu not in SUPPORTED_NU:
            raise InvalidParam(f"nu must be one of {SUPPORTED_NU}, got {self.nu}")
        if not self.a > 0:
            raise InvalidParam(f"range a must be positive, got {self.a}")
        if not self.sigma2 > 0:
            raise InvalidParam(f"variance sigma2 must be positive, got {self.sigma2}")
        return self


class Grid(NamedTuple):
    locs: np.ndarray
    D: np.ndarray


def grid_locations(M: int) -> Grid:
    """``M x M`` grid on the unit square and its Euclidean distance matrix.

    Points are ordered with x varying fastest, as ``expand.grid`` does.
    """
    M = int(M)
    if M < 2:
        raise InvalidParam("grid side M must be >= 2")
    g = np.arange(M) / (M - 1)
    locs = np.column_stack([np.tile(g, M), np.repeat(g, M)])
    return Grid(locs, distance_matrix(locs))


def distance_matrix(locs: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances, exactly symmetric with zero diagonal."""
    locs = np.asarray(locs, dtype=np.float64)
    if locs.ndim == 1:
        locs = locs[:, None]
    sq = np.zeros((locs.shape[0], locs.shape[0]))
    for c in range(locs.shape[1]):
        diff = locs[:, c][:, None] - locs[:, c][None, :]
        sq += diff * diff
    return np.sqrt(sq)


def matern_values(D: np.ndarray, params: MaternParams) -> np.ndarray:
    """Closed-form Matérn covariance in double for nu in {0.5, 1.5, 2.5}."""
    params.validate()
    D = np.asarray(D, dtype=np.float64)
    if np.any(D < 0):
        raise InvalidParam("distances must be non-negative")
    r = D / params.a
    if params.nu == 0.5:
        k = np.exp(-r)
    elif params.nu == 1.5:
        s = np.sqrt(3.0) * r
        k = (1.0 + s) * np.exp(-s)
    else:
        s = np.sqrt(5.0) * r
        k = (1.0 + s + 5.0 * r * r / 3.0) * np.exp(-s)
    return params.sigma2 * k


def matern_cov(D, params: MaternParams, precision=Precision.DOUBLE) -> MPArray:
    """Matérn covariance matrix, built in double then rounded to ``precision``."""
    return from_numpy(matern_values(D, params), parse_precision(precision))


def exp_cov(D, sigma2: float, a: float, precision=Precision.DOUBLE) -> MPArray:
    """Exponential covariance ``sigma2 * exp(-D / a)`` (Matérn with nu = 0.5)."""
    return matern_cov(D, MaternParams(0.5, a, sigma2), precision)


def sample_gp(cov: MPArray, rng: Rng) -> MPArray:
    """Draw ``z = L eps`` with ``L = t(chol(cov))`` and ``eps`` standard normal.

    Runs at ``cov``'s precision; the normals are rounded to it as well.
    """
    eps = from_doubles(rng.normal(cov.nrow), precision=cov.precision)
    L = transpose(chol(cov))
    return matmul(L, eps).to_vector()
