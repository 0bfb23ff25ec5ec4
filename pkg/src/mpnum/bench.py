"""Kernel benchmarks with relative Frobenius error against a double oracle.

For each (op, n) one set of double inputs is generated and shared by every
precision, so errors are paired.  Each precision rounds the inputs, times
``reps`` runs with a monotonic clock and reports the median; the error is
``||X_p - X_double||_F / ||X_double||_F`` with the double run as oracle.
"""

from __future__ import annotations

import math
import statistics
import time
from typing import Callable, Dict, List, Sequence

import numpy as np

from .array import MPArray, from_numpy
from .apps.rng import Rng
from .apps.spatial import distance_matrix
from .errors import InvalidParam
from .io import BenchRecord
from .linalg import backsolve, chol, crossprod, gemm, svd
from .precision import Precision, parse_precision

OPS = ("chol", "crossprod", "backsolve", "gemm", "svd")
HALF_OPS = ("crossprod", "gemm")
MAX_N = 4096
# range of the exponential covariance used for chol/backsolve inputs
CHOL_RANGE = 0.1


def covariance_input(n: int, a: float = CHOL_RANGE) -> np.ndarray:
    """Exponential covariance ``exp(-d/a)`` on the first n points of a ceil(sqrt(n)) unit grid."""
    M = max(2, math.ceil(math.sqrt(n)))
    g = np.arange(M) / (M - 1)
    locs = np.column_stack([np.tile(g, M), np.repeat(g, M)])[:n]
    return np.exp(-distance_matrix(locs) / a)


def make_inputs(op: str, n: int, seed: int) -> Dict[str, np.ndarray]:
    rng = Rng(seed)

    def uniform(r, c):
        return rng.uniform(r * c).reshape((r, c), order="F")

    if op in ("crossprod", "svd"):
        return {"A": uniform(n, n)}
    if op == "gemm":
        return {"A": uniform(n, n), "B": uniform(n, n)}
    if op == "chol":
        return {"A": covariance_input(n)}
    if op == "backsolve":
        U = chol(from_numpy(covariance_input(n))).to_numpy()
        return {"U": U, "B": uniform(n, n)}
    raise InvalidParam(f"unknown benchmark op {op!r}; expected one of {OPS}")


def _runner(op: str, inputs: Dict[str, np.ndarray], p: Precision) -> Callable[[], MPArray]:
    args = {k: from_numpy(v, p) for k, v in inputs.items()}
    if op == "crossprod":
        return lambda: crossprod(args["A"])
    if op == "gemm":
        def run():
            C = from_numpy(np.zeros(inputs["A"].shape), p)
            return gemm(args["A"], args["B"], C)
        return run
    if op == "chol":
        return lambda: chol(args["A"])
    if op == "backsolve":
        return lambda: backsolve(args["U"], args["B"])
    if op == "svd":
        return lambda: svd(args["A"], nu=0, nv=0).d
    raise InvalidParam(f"unknown benchmark op {op!r}")


def rel_frob_err(x: np.ndarray, ref: np.ndarray) -> float:
    num = np.linalg.norm(np.asarray(x, dtype=np.float64) - ref)
    den = np.linalg.norm(ref)
    return float(num / den) if den > 0 else float(num)


def validate(op: str, sizes: Sequence[int], precisions: Sequence[Precision], allow_half_all=False, big=False):
    if op not in OPS:
        raise InvalidParam(f"unknown benchmark op {op!r}; expected one of {', '.join(OPS)}")
    for n in sizes:
        if n < 2:
            raise InvalidParam(f"sizes must be >= 2, got {n}")
        if n > MAX_N and not big:
            raise InvalidParam(f"size {n} exceeds the desk-scale cap {MAX_N}; pass --big to allow it")
    if Precision.HALF in precisions and op not in HALF_OPS and not allow_half_all:
        raise InvalidParam(
            f"half precision is restricted to {' and '.join(HALF_OPS)} benchmarks; "
            "pass --allow-half-all to override"
        )


def run_bench(
    op: str,
    sizes: Sequence[int],
    precisions: Sequence,
    reps: int = 5,
    seed: int = 1,
    allow_half_all: bool = False,
    big: bool = False,
    placement: str = "CPU",
) -> List[BenchRecord]:
    """Benchmark ``op`` for every size and precision; returns one record per pair."""
    precisions = [parse_precision(p) for p in precisions]
    if reps < 1:
        raise InvalidParam("reps must be >= 1")
    validate(op, sizes, precisions, allow_half_all, big)
    records = []
    for n in sizes:
        inputs = make_inputs(op, n, seed)
        oracle = None
        outputs = {}
        order = [Precision.DOUBLE] + [p for p in precisions if p is not Precision.DOUBLE]
        for p in order:
            run = _runner(op, inputs, p)
            times = []
            out = None
            for _ in range(reps if p in precisions else 1):
                t0 = time.perf_counter()
                out = run()
                times.append(time.perf_counter() - t0)
            outputs[p] = (out.to_numpy(), statistics.median(times))
            if p is Precision.DOUBLE:
                oracle = outputs[p][0]
        for p in precisions:
            X, med = outputs[p]
            records.append(BenchRecord(op, int(n), p.label, placement, int(reps), med, rel_frob_err(X, oracle)))
    return records
