"""Time the compiled kernels against the numpy fallback.

Both backends produce bit-identical results; this script checks that on
every run and reports the median time of each kernel per backend.

    python3 benchmarks/compare_backends.py --sizes 256,512 --reps 3
"""

import argparse
import statistics
import time

import numpy as np

from mpnum import _backend

KERNELS = ("gemm_nn", "chol_upper", "trsm_upper", "lu_factor", "jacobi_sweeps")


def _inputs(n, dtype, seed=0):
    rng = np.random.default_rng(seed)
    A = np.asfortranarray(rng.random((n, n)), dtype=dtype)
    B = np.asfortranarray(rng.random((n, n)), dtype=dtype)
    S = np.asfortranarray(A.T @ A + n * np.eye(n), dtype=dtype)
    return A, B, S


def _run(kernels, name, inputs):
    A, B, S = inputs
    n, dtype = A.shape[0], A.dtype.type
    if name == "gemm_nn":
        C = np.zeros((n, n), dtype=dtype, order="F")
        kernels.gemm_nn(A, B, C, 1)
        return C
    if name == "chol_upper":
        U = S.copy(order="F")
        kernels.chol_upper(U, 1)
        return U
    if name == "trsm_upper":
        U = np.asfortranarray(np.triu(S))
        X = B.copy(order="F")
        kernels.trsm_upper(U, X, False, 1)
        return X
    if name == "lu_factor":
        LU = A.copy(order="F")
        kernels.lu_factor(LU, np.zeros(n, dtype=np.intp), 1)
        return LU
    G = A[:, : max(2, n // 8)].copy(order="F")
    V = np.eye(G.shape[1], dtype=dtype, order="F")
    u = np.finfo(dtype).eps / 2
    kernels.jacobi_sweeps(G, V, dtype(10 * u), dtype(0), 30)
    return G


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256")
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--dtype", choices=("float32", "float64"), default="float64")
    args = ap.parse_args()
    if "compiled" not in _backend.available():
        raise SystemExit("compiled extension not built; reinstall with a C compiler available")
    dtype = np.dtype(args.dtype).type
    mods = {name: _backend._BACKENDS[name] for name in ("compiled", "python")}
    print(f"{'kernel':<14}{'n':>6}{'compiled s':>14}{'python s':>14}{'speedup':>10}  identical")
    for n in (int(s) for s in args.sizes.split(",")):
        inputs = _inputs(n, dtype)
        for name in KERNELS:
            res, med = {}, {}
            for b, mod in mods.items():
                times = []
                for _ in range(args.reps):
                    t0 = time.perf_counter()
                    res[b] = _run(mod, name, inputs)
                    times.append(time.perf_counter() - t0)
                med[b] = statistics.median(times)
            same = np.array_equal(res["compiled"], res["python"])
            print(f"{name:<14}{n:>6}{med['compiled']:>14.4f}{med['python']:>14.4f}"
                  f"{med['python'] / med['compiled']:>10.1f}  {same}")


if __name__ == "__main__":
    main()
