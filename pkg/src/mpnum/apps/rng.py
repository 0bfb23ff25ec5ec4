"""Portable seeded random stream for the application workloads.

The bit generator is numpy's PCG64 (a 128-bit permuted congruential
generator with a documented, platform-independent output sequence).  On top
of the raw 64-bit words we apply fixed transforms so every derived draw is
reproducible from the seed alone:

* uniform: ``(word >> 11) * 2**-53``, a double on [0, 1);
* normal: Box-Muller on consecutive uniform pairs ``(u1, u2)``,
  ``r = sqrt(-2 log(1 - u1))``, giving ``r cos(2 pi u2)`` then
  ``r sin(2 pi u2)``; an odd request discards the last spare value;
* bernoulli(p): ``uniform < p``.
"""

from __future__ import annotations

import numpy as np

_TWO_M53 = 2.0 ** -53


class Rng:
    """Seeded generator of uniforms, normals and Bernoulli draws.

    Parameters
    ----------
    seed : int
        Non-negative seed.  Equal seeds give equal streams.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self._bitgen = np.random.PCG64(self.seed)

    def _raw(self, n: int) -> np.ndarray:
        return np.asarray(self._bitgen.random_raw(n), dtype=np.uint64)

    def uniform(self, n: int = None):
        """``n`` uniforms on [0, 1) (a float when ``n`` is None)."""
        m = 1 if n is None else int(n)
        u = (self._raw(m) >> np.uint64(11)).astype(np.float64) * _TWO_M53
        return float(u[0]) if n is None else u

    def normal(self, n: int = None):
        """``n`` standard normals via Box-Muller (a float when ``n`` is None)."""
        m = 1 if n is None else int(n)
        pairs = (m + 1) // 2
        u = self.uniform(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return float(out[0]) if n is None else out[:m]

    def bernoulli(self, p, n: int = None):
        """Bernoulli draws with success probability ``p`` (scalar or array)."""
        if n is None and np.ndim(p) == 0:
            return int(self.uniform() < p)
        p = np.asarray(p, dtype=np.float64)
        m = p.size if n is None else int(n)
        return (self.uniform(m) < p).astype(np.int64)


def rng_uniform(rng: Rng) -> float:
    return rng.uniform()


def rng_normal(rng: Rng) -> float:
    return rng.normal()


def rng_bernoulli(rng: Rng, p: float) -> int:
    return rng.bernoulli(p)
