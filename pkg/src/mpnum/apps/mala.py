"""Metropolis-adjusted Langevin sampling of a Gaussian random field.

The target is N(mu, Sigma) with score ``-Sigma^{-1} (x - mu)``.  Proposals
are ``step(z, h/2) + L eps`` where ``step(x, t) = x - t M Sigma^{-1} (x - mu)``
and ``L = t(chol(h M))``.  All linear algebra runs at the chosen precision;
log-densities are reduced to doubles and the chain trace is kept in double.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..array import MPArray, ew_scalar, from_doubles, from_numpy, transpose
from ..errors import InvalidParam
from ..linalg import chol, crossprod, matmul, solve
from ..precision import Precision, parse_precision
from .rng import Rng
from .spatial import exp_cov, grid_locations


@dataclass
class GaussianTarget:
    """Target N(mu, sigma); arrays are double numpy data."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64).ravel()
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.sigma.shape != (self.mu.size, self.mu.size):
            raise InvalidParam("sigma must be n x n with n = len(mu)")
        if not np.array_equal(self.sigma, self.sigma.T):
            raise InvalidParam("sigma must be symmetric")


@dataclass
class MalaConfig:
    h: float
    M: np.ndarray
    iters: int = 100
    seed: int = 1234

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidParam(f"step size h must be positive, got {self.h}")
        if self.iters < 0:
            raise InvalidParam("iters must be non-negative")
        self.M = np.asarray(self.M, dtype=np.float64)


def _num(x: MPArray) -> float:
    """Scalar value of a 1 x 1 result, widened to double."""
    return float(x.to_doubles()[0])


class MalaKernel:
    """Precomputed operators for MALA at one precision.

    Holds ``Sigma^{-1}``, ``t M`` for the half step, ``L = t(chol(h M))``
    and ``(h M)^{-1}``, all stored at ``precision``.
    """

    def __init__(self, target: GaussianTarget, M, h: float, precision=Precision.DOUBLE):
        p = parse_precision(precision)
        self.precision = p
        self.h = float(h)
        self.n = target.mu.size
        self.mu = from_doubles(target.mu, precision=p)
        sig = from_numpy(target.sigma, p)
        Mp = from_numpy(np.asarray(M, dtype=np.float64), p)
        self.sig_inv = solve(sig)
        hM = ew_scalar("mul", Mp, self.h)
        self.L = transpose(chol(hM))
        self.hM_inv = solve(hM)
        self.M_half = ew_scalar("mul", Mp, 0.5 * self.h)

    def vector(self, x) -> MPArray:
        if isinstance(x, MPArray):
            return x
        return from_doubles(np.asarray(x, dtype=np.float64), precision=self.precision)

    def grad_step(self, x: MPArray) -> MPArray:
        """``(h/2) M Sigma^{-1} (x - mu)``, the amount removed by a half step."""
        return matmul(self.M_half, matmul(self.sig_inv, x - self.mu)).to_vector()

    def step(self, x: MPArray) -> MPArray:
        """Half Langevin step ``x - (h/2) M Sigma^{-1} (x - mu)``."""
        return x - self.grad_step(x)

    def drift(self, x: MPArray) -> MPArray:
        return ew_scalar("mul", self.grad_step(x), -1.0)

    def log_target(self, x: MPArray) -> float:
        """``-0.5 (x - mu)' Sigma^{-1} (x - mu)`` (unnormalised)."""
        d = x - self.mu
        return -0.5 * _num(crossprod(d, matmul(self.sig_inv, d)))

    def log_q(self, to: MPArray, frm: MPArray) -> float:
        """Unnormalised log proposal density of ``to`` given ``frm``."""
        r = to - self.step(frm)
        return -0.5 * _num(crossprod(r, matmul(self.hM_inv, r)))

    def log_ratio(self, z: MPArray, z_prop: MPArray) -> float:
        """Metropolis-Hastings log acceptance ratio for ``z -> z_prop``.

        Equal to ``p(z') - p(z) + q(z | z') - q(z' | z)``.  With
        ``g(x) = (h/2) M Sigma^{-1} (x - mu)`` the proposal residuals are
        ``r_c = z - z' + g(z')`` and ``r_p = z' - z + g(z)``, and each
        difference of quadratic forms ``a'Aa - b'Ab`` is evaluated as
        ``(a - b)' A (a + b)``.  Here ``r_c + r_p = g(z) + g(z')`` is formed
        without subtracting the states, so no large terms cancel when the
        step size is small.
        """
        dz = z_prop - z
        s = (z_prop - self.mu) + (z - self.mu)
        dp = -0.5 * _num(crossprod(dz, matmul(self.sig_inv, s)))
        g_curr = self.grad_step(z)
        g_prop = self.grad_step(z_prop)
        r_sum = g_curr + g_prop
        r_diff = ew_scalar("mul", dz, -2.0) + (g_prop - g_curr)
        dq = -0.5 * _num(crossprod(r_diff, matmul(self.hM_inv, r_sum)))
        return dp + dq

    def propose(self, z: MPArray, eps) -> MPArray:
        return self.step(z) + matmul(self.L, self.vector(eps)).to_vector()


class MalaResult(NamedTuple):
    trace: np.ndarray  # n x iters, double
    accept_rate: float
    elapsed: float
    first_proposal: np.ndarray
    log_ratios: np.ndarray


def mala_run(target: GaussianTarget, cfg: MalaConfig, precision=Precision.DOUBLE, z0=None) -> MalaResult:
    """Run ``cfg.iters`` MALA iterations.

    The stream of ``Rng(cfg.seed)`` is consumed as: n uniforms for the
    initial state (unless ``z0`` is given), then per iteration n normals
    for the proposal followed by one uniform for the accept test.
    """
    kernel = MalaKernel(target, cfg.M, cfg.h, precision)
    rng = Rng(cfg.seed)
    n = kernel.n
    z = kernel.vector(rng.uniform(n) if z0 is None else z0)
    trace = np.empty((n, cfg.iters))
    ratios = np.empty(cfg.iters)
    first = None
    accepted = 0
    t0 = time.perf_counter()
    for i in range(cfg.iters):
        eps = rng.normal(n)
        z_prop = kernel.propose(z, eps)
        if first is None:
            first = z_prop.to_doubles()
        lr = kernel.log_ratio(z, z_prop)
        ratios[i] = lr
        if rng.uniform() < math.exp(min(0.0, lr)):
            z = z_prop
            accepted += 1
        trace[:, i] = z.to_doubles()
    elapsed = time.perf_counter() - t0
    rate = accepted / cfg.iters if cfg.iters else float("nan")
    return MalaResult(trace, rate, elapsed, first, ratios)


def default_problem(M: int = 16, h: float = 0.01, iters: int = 100, seed: int = 1234):
    """Grid field setup: mu = 0, Sigma = exp(-D/0.5), preconditioner exp(-D/0.05)."""
    D = grid_locations(M).D
    n = M * M
    target = GaussianTarget(np.zeros(n), exp_cov(D, 1.0, 0.5).to_numpy())
    cfg = MalaConfig(h, exp_cov(D, 1.0, 0.05).to_numpy(), iters, seed)
    return target, cfg
