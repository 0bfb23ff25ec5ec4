"""Command-line interface: ``mpnum bench | app | print``.

Exit codes: 0 success, 1 numerical failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List

import numpy as np

from . import _backend
from .errors import InvalidParam, NumericalError

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

APPS = ("mala", "matern-mle", "pca", "laplace")
MAX_GRID = 40
MAX_LAPLACE_N = 1600
MAX_PCA_DIM = 4096


class UsageError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _prec_list(text: str) -> List[str]:
    out = [t.strip().lower() for t in text.split(",") if t.strip()]
    for t in out:
        if t not in ("half", "single", "double"):
            raise argparse.ArgumentTypeError(f"unknown precision {t!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="kernel threads (default: MPNUM_THREADS or 1)")
    common.add_argument("--backend", choices=("compiled", "python"), default=None,
                        help="kernel backend (default: compiled when built)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--big", action="store_true", help="lift desk-scale size caps")

    parser = argparse.ArgumentParser(prog="mpnum", description="Multi-precision linear algebra benchmarks and workloads.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", parents=[common], help="benchmark a kernel across sizes and precisions")
    b.add_argument("op", choices=("chol", "crossprod", "backsolve", "gemm", "svd"))
    b.add_argument("--sizes", type=_int_list, default=[256, 512])
    b.add_argument("--precisions", type=_prec_list, default=None,
                   help="comma list (default: half,single,double for crossprod/gemm, else single,double)")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--allow-half-all", action="store_true",
                   help="permit half precision for every op")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out", default=None, help="results file (default: stdout)")

    a = sub.add_parser("app", parents=[common], help="run an application workload")
    a.add_argument("name", choices=APPS)
    a.add_argument("--precision", type=_prec_list, default=["single", "double"])
    a.add_argument("--grid", type=int, default=None, help="grid side M (mala, matern-mle)")
    a.add_argument("--n", type=int, default=None, help="number of points (laplace)")
    a.add_argument("--rows", type=int, default=200)
    a.add_argument("--cols", type=int, default=400)
    a.add_argument("--k", type=int, default=3)
    a.add_argument("--iters", type=int, default=100)
    a.add_argument("--h", type=float, default=0.01)
    a.add_argument("--out", default="mpnum_out", help="output directory")

    p = sub.add_parser("print", parents=[common], help="print a CSV matrix in MPCR layout")
    p.add_argument("path")
    p.add_argument("--precision", default="double", choices=("half", "single", "double"))
    p.add_argument("--shape", choices=("auto", "vector", "matrix"), default="auto",
                   help="auto: a single row or column prints as a vector")
    p.add_argument("--placement", choices=("CPU", "GPU"), default="CPU")
    return parser


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    from .bench import HALF_OPS, run_bench
    from .io import write_results

    precisions = args.precisions
    if precisions is None:
        precisions = ["half", "single", "double"] if args.op in HALF_OPS else ["single", "double"]
    try:
        records = run_bench(
            args.op, args.sizes, precisions, reps=args.reps,
            seed=1 if args.seed is None else args.seed,
            allow_half_all=args.allow_half_all, big=args.big,
        )
    except InvalidParam as exc:
        raise UsageError(str(exc)) from None
    write_results(args.out or sys.stdout, records, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# app


class _Artifacts:
    """Tracks files written by a run so a failure can remove them."""

    def __init__(self, root: Path):
        self.root = root
        self.paths: List[Path] = []
        self.created_root = not root.exists()

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        p = self.root / name
        self.paths.append(p)
        return p

    def write_csv(self, name: str, rows, header=None):
        import csv

        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if header:
                w.writerow(header)
            for r in np.atleast_2d(rows) if np.ndim(rows) else []:
                w.writerow([repr(float(v)) for v in np.atleast_1d(r)])

    def write_json(self, name: str, obj):
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")

    def cleanup(self):
        for p in self.paths:
            try:
                p.unlink()
            except FileNotFoundError:
                pass
        if self.created_root:
            try:
                self.root.rmdir()
            except OSError:
                pass


def _check_cap(value, cap, flag, big):
    if value is not None and value > cap and not big:
        raise UsageError(f"{flag} {value} exceeds the desk-scale cap {cap}; pass --big to allow it")


def _app_mala(args, art):
    from .apps.mala import default_problem, mala_run

    M = args.grid or 16
    _check_cap(M, MAX_GRID, "--grid", args.big)
    seed = args.seed
    target, cfg = default_problem(M, args.h, args.iters, seed)
    out = {}
    for p in args.precision:
        r = mala_run(target, cfg, p)
        art.write_csv(f"mala_trace_{p}.csv", r.trace)
        out[p] = {"accept_rate": r.accept_rate, "elapsed": r.elapsed, "n": M * M, "iters": args.iters}
    return out


def _app_mle(args, art):
    from .apps.mle import matern_mle
    from .apps.rng import Rng
    from .apps.spatial import exp_cov, grid_locations, sample_gp

    M = args.grid or 30
    _check_cap(M, MAX_GRID, "--grid", args.big)
    seed = args.seed
    g = grid_locations(M)
    z = sample_gp(exp_cov(g.D, 1.0, 0.03), Rng(seed)).to_doubles()
    art.write_csv("matern_field.csv", z[:, None])
    out = {}
    for p in args.precision:
        r = matern_mle(z, g.D, p)
        out[p] = {
            "theta": list(r.theta), "nll": r.nll, "iterations": r.iterations,
            "converged": r.converged, "elapsed": r.elapsed, "n": M * M,
        }
    return out


def _app_pca(args, art):
    from .apps.pca import pca_eof, synthetic_field

    for flag, v in (("--rows", args.rows), ("--cols", args.cols)):
        _check_cap(v, MAX_PCA_DIM, flag, args.big)
    seed = args.seed
    X = synthetic_field(args.rows, args.cols, seed=seed)
    out = {}
    ref = None
    for p in sorted(args.precision, key=lambda s: ("double", "single", "half").index(s)):
        r = pca_eof(X, args.k, p, reference=ref)
        if ref is None:
            ref = r.eofs
        art.write_csv(f"pca_eofs_{p}.csv", r.eofs)
        art.write_csv(f"pca_scores_{p}.csv", r.scores)
        out[p] = {"pct_var": r.pct_var.tolist(), "elapsed": r.elapsed}
    return out


def _app_laplace(args, art):
    from .apps.laplace import generate_data, posterior_grid

    n = args.n or 100
    _check_cap(n, MAX_LAPLACE_N, "--n", args.big)
    seed = args.seed
    data = generate_data(n, seed=seed)
    out = {}
    for p in args.precision:
        r = posterior_grid(data.D, data.y, p)
        art.write_csv(f"laplace_posterior_{p}.csv", np.column_stack([r.alpha, r.posterior]), header=["alpha", "posterior"])
        out[p] = {
            "alpha_argmax": float(r.alpha[int(np.argmax(r.posterior))]),
            "posterior": r.posterior.tolist(), "elapsed": r.elapsed, "n": n,
        }
    return out


_APP_FUNCS = {"mala": _app_mala, "matern-mle": _app_mle, "pca": _app_pca, "laplace": _app_laplace}


_DEFAULT_SEEDS = {"mala": 1234, "matern-mle": 4, "pca": 0, "laplace": 4}


def cmd_app(args) -> int:
    if args.seed is None:
        args.seed = _DEFAULT_SEEDS[args.name]
    art = _Artifacts(Path(args.out))
    try:
        results = _APP_FUNCS[args.name](args, art)
        summary = {"app": args.name, "seed": args.seed, "backend": _backend.backend_name(),
                   "threads": _backend.get_num_threads(), "results": results}
        art.write_json(f"{args.name}_summary.json", summary)
    except BaseException:
        art.cleanup()
        raise
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# print


def cmd_print(args) -> int:
    from .array import format as fmt
    from .io import read_matrix_csv

    a = read_matrix_csv(args.path, args.precision)
    if args.shape == "vector" or (args.shape == "auto" and a.size and 1 in a.shape):
        a.to_vector()
    from .precision import parse_placement

    a.placement = parse_placement(args.placement)
    print(fmt(a))
    return EXIT_OK


_COMMANDS = {"bench": cmd_bench, "app": cmd_app, "print": cmd_print}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        if args.backend:
            _backend.use_backend(args.backend)
        if args.threads is not None:
            _backend.set_num_threads(args.threads)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mpnum: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"mpnum: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"mpnum: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
