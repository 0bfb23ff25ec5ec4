"""Acceptance checks, one test per criterion.

Each test is named ``test_criterion_<k>_<title>``; the conftest hook prints
one PASS/FAIL line per criterion at the end of the run.  Run alone with::

    pytest tests/test_acceptance.py -v
"""

import json
import time

import numpy as np
import pytest

import mpnum as mp
import oracles
from mpnum import _backend, cli
from mpnum.apps import laplace, mala, mle, pca
from mpnum.apps.rng import Rng
from mpnum.apps.spatial import exp_cov, grid_locations, sample_gp
from mpnum.bench import covariance_input, run_bench
from mpnum.precision import DECODE_TABLE, Precision, encode_f16_array

H, S, D = Precision.HALF, Precision.SINGLE, Precision.DOUBLE


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


def test_criterion_1_format_constants_and_half_round_trip():
    with Budget(1.0):
        assert H.max_finite == 65504.0 == (2 - 2.0 ** -10) * 2.0 ** 15
        assert S.max_finite == (2 - 2.0 ** -23) * 2.0 ** 127
        assert D.max_finite == (2 - 2.0 ** -52) * 2.0 ** 1023
        bits = np.arange(1 << 16, dtype=np.uint16)
        back = encode_f16_array(DECODE_TABLE[bits])
        nan = np.isnan(DECODE_TABLE)
        assert np.array_equal(back[~nan], bits[~nan])
        assert np.all(back[nan] == 0x7E00)
        assert np.all(np.isnan(DECODE_TABLE[back[nan]]))


def test_criterion_2_promotion_rule():
    with Budget(1.0):
        for a in Precision:
            for b in Precision:
                key = mp.resolve("add", a, b)
                assert key.out is max(a, b)
                x = mp.from_doubles([1.0], precision=a) + mp.from_doubles([2.0], precision=b)
                assert x.precision is max(a, b)
        z = mp.from_doubles(np.arange(1, 21), precision="single") + mp.from_doubles(np.arange(21, 41), precision="double")
        assert z.precision is D
        assert np.array_equal(z.to_doubles(), np.arange(1, 21) + np.arange(21, 41))


def test_criterion_3_svd_fixed_matrix():
    with Budget(1.0):
        values = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0,
                  0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1]
        a = mp.from_doubles(values, precision="single")
        a.to_matrix(9, 4)
        r = mp.svd(a, 4, 4)
        assert r.d.size == 4 and r.d.precision is S
        assert np.allclose(r.d.to_doubles(), [3.464102, 1.732051, 1.732051, 0.0], atol=1e-3, rtol=0)
        rec = mp.matmul(mp.matmul(r.u, mp.diag_from(r.d)), mp.transpose(r.v))
        rec = mp.ew_unary("abs", mp.ew_unary("round", rec, digits=1))
        assert np.all(np.abs(rec.to_numpy() - a.to_numpy()) <= 1e-3)


def test_criterion_4_error_magnitudes():
    with Budget(60.0):
        recs = run_bench("crossprod", [256, 1024], ["half", "single", "double"], reps=1)
        recs += run_bench("chol", [256, 1024], ["half", "single", "double"], reps=1, allow_half_all=True)
        err = {(r.op, r.n, r.precision): r.rel_frob_err for r in recs}
        for line in sorted(err.items()):
            print(line)
        assert 1e-4 <= err["crossprod", 1024, "half"] <= 2e-2
        assert 1e-8 <= err["crossprod", 1024, "single"] <= 1e-5
        assert err["crossprod", 1024, "double"] <= 1e-13
        assert 1e-6 <= err["chol", 1024, "single"] <= 1e-3
        assert err["chol", 1024, "double"] <= 1e-11
        for op in ("crossprod", "chol"):
            for n in (256, 1024):
                assert err[op, n, "half"] > err[op, n, "single"] > err[op, n, "double"]
        # the double results against an independent (LAPACK/BLAS) oracle
        A = Rng(1).uniform(1024 * 1024).reshape((1024, 1024), order="F")
        C = mp.crossprod(mp.from_numpy(A)).to_numpy()
        ref = A.T @ A
        assert np.linalg.norm(C - ref) / np.linalg.norm(ref) <= 1e-13
        V = covariance_input(1024)
        U = mp.chol(mp.from_numpy(V)).to_numpy()
        ref = np.linalg.cholesky(V).T
        assert np.linalg.norm(U - ref) / np.linalg.norm(ref) <= 1e-11
        single_vs_lapack = np.linalg.norm(mp.chol(mp.from_numpy(V, "single")).to_numpy() - ref) / np.linalg.norm(ref)
        assert single_vs_lapack > np.linalg.norm(U - ref) / np.linalg.norm(ref)


def _instances(rng, count):
    for _ in range(count):
        yield int(rng.integers(1, 9)), int(rng.integers(1, 9)), int(rng.integers(1, 9))


def test_criterion_5_oracle_equivalence():
    tol = 1e-12
    rng = np.random.default_rng(20240601)
    worst = {}

    def check(name, got, ref):
        e = oracles.rel_frob(np.atleast_2d(got).tolist(), np.atleast_2d(ref).tolist())
        worst[name] = max(worst.get(name, 0.0), e)

    with Budget(30.0):
        for m, k, n in _instances(rng, 200):
            A = rng.uniform(-1, 1, (m, k))
            B = rng.uniform(-1, 1, (k, n))
            C0 = rng.uniform(-1, 1, (m, n))
            Al, Bl = A.tolist(), B.tolist()
            check("matmul", mp.matmul(mp.from_numpy(A), mp.from_numpy(B)).to_numpy(), oracles.matmul(Al, Bl))

            C = mp.from_numpy(C0)
            mp.gemm(mp.from_numpy(A.T.copy()), mp.from_numpy(B), C, trans_a=True, alpha=1.5, beta=-0.5)
            prod = oracles.matmul(Al, Bl)
            ref = [[1.5 * p - 0.5 * c for p, c in zip(rp, rc)] for rp, rc in zip(prod, C0.tolist())]
            check("gemm", C.to_numpy(), ref)

            X = rng.uniform(-1, 1, (k, k))
            Sp = X.T @ X + k * np.eye(k)
            check("chol", mp.chol(mp.from_numpy(Sp)).to_numpy(), oracles.cholesky_upper(Sp.tolist()))

            L = np.tril(rng.uniform(-1, 1, (k, k))) + 2 * np.eye(k)
            R = rng.uniform(-1, 1, (k, n))
            check("forwardsolve", mp.forwardsolve(mp.from_numpy(L), mp.from_numpy(R)).to_numpy(),
                  oracles.forward_sub(L.tolist(), R.tolist()))
            check("backsolve", mp.backsolve(mp.from_numpy(L.T), mp.from_numpy(R)).to_numpy(),
                  oracles.back_sub(L.T.tolist(), R.tolist()))
            # X L' = R'  <=>  L X' = R
            Xr = mp.trsm(mp.from_numpy(L), mp.from_numpy(R.T), side="right", upper=False, trans=True)
            check("trsm", Xr.to_numpy(), oracles.transpose(oracles.forward_sub(L.tolist(), R.tolist())))

            G = rng.uniform(-1, 1, (k, k)) + k * np.eye(k)
            check("solve", mp.solve(mp.from_numpy(G), mp.from_numpy(R)).to_numpy(),
                  oracles.gauss_solve(G.tolist(), R.tolist()))

            r = mp.svd(mp.from_numpy(A))
            check("svd", [r.d.to_doubles().tolist()], [oracles.jacobi_singular_values(Al)])
            U, d, V = r.u.to_numpy(), r.d.to_doubles(), r.v.to_numpy()
            check("svd", U @ np.diag(d) @ V.T, Al)
    print({k: f"{v:.2e}" for k, v in worst.items()})
    assert set(worst) == {"matmul", "gemm", "chol", "forwardsolve", "backsolve", "trsm", "solve", "svd"}
    assert max(worst.values()) <= tol, worst


def test_criterion_6_matern_mle_consistency():
    with Budget(300.0):
        g = grid_locations(30)
        z = sample_gp(exp_cov(g.D, 1.0, 0.03), Rng(4)).to_doubles()
        rs = mle.matern_mle(z, g.D, "single")
        rd = mle.matern_mle(z, g.D, "double")
    print("single", rs.theta, rs.iterations, "double", rd.theta, rd.iterations)
    assert rs.converged and rd.converged
    assert rs.iterations == rd.iterations
    for a, b in zip(rs.theta, rd.theta):
        assert abs(a - b) <= 0.01 * abs(b)
    for r in (rs, rd):
        assert abs(r.theta[0] - 1.0) <= 0.15
        assert abs(r.theta[1] - 0.03) <= 0.15 * 0.03


def test_criterion_7_laplace_posterior():
    with Budget(120.0):
        data = laplace.generate_data(100, seed=4)
        rd = laplace.posterior_grid(data.D, data.y, "double")
        rs = laplace.posterior_grid(data.D, data.y, "single")
    h = rd.alpha[1] - rd.alpha[0]
    argmax = rd.alpha[int(np.argmax(rd.posterior))]
    print("argmax", argmax, "max|single-double|", np.max(np.abs(rs.posterior - rd.posterior)))
    for r in (rs, rd):
        assert abs(laplace.simpson(r.posterior, h) - 1.0) <= 1e-15
    assert np.max(np.abs(rs.posterior - rd.posterior)) <= 0.05
    assert abs(argmax - laplace.ALPHA_TRUE) <= h + 1e-12


def test_criterion_8_mala_consistency():
    with Budget(120.0):
        target, cfg = mala.default_problem(M=16, h=0.01, iters=200, seed=1234)
        rs = mala.mala_run(target, cfg, "single")
        rd = mala.mala_run(target, cfg, "double")
        rel = np.max(np.abs(rs.first_proposal - rd.first_proposal)) / np.max(np.abs(rd.first_proposal))
        print("first proposal rel", rel, "accept", rs.accept_rate, rd.accept_rate)
        assert rel < 1e-3
        assert abs(rs.accept_rate - rd.accept_rate) <= 0.1

        # degenerate step: proposals stay put and every log ratio vanishes
        tiny = mala.MalaConfig(1e-12, cfg.M, 10, cfg.seed)
        rt = mala.mala_run(target, tiny, "double")
        assert np.max(np.abs(rt.log_ratios)) <= 1e-10 and rt.accept_rate == 1.0

        # M = Sigma at mu = z: the drift cancels exactly, and the log ratio
        # reduces to the closed form -h |Sigma^{-1/2}(z' - z)|^2 / 8
        k = mala.MalaKernel(target, target.sigma, cfg.h, "double")
        z0 = k.vector(Rng(7).normal(target.mu.size))
        shifted = mala.MalaKernel(mala.GaussianTarget(z0.to_doubles(), target.sigma), target.sigma, cfg.h, "double")
        assert np.max(np.abs(shifted.drift(z0).to_doubles())) <= 1e-10
        zp = shifted.propose(z0, Rng(8).normal(target.mu.size))
        dz = zp.to_doubles() - z0.to_doubles()
        closed = -cfg.h * dz @ np.linalg.solve(target.sigma, dz) / 8.0
        assert abs(shifted.log_ratio(z0, zp) - closed) <= 1e-10


def test_criterion_9_pca_consistency():
    with Budget(30.0):
        X = pca.synthetic_field(200, 400, seed=0)
        rd = pca.pca_eof(X, 3, "double")
        rs = pca.pca_eof(X, 3, "single", reference=rd.eofs)
    print("pct_var", rd.pct_var, np.abs(rs.pct_var - rd.pct_var))
    assert np.max(np.abs(rs.pct_var - rd.pct_var)) <= 1e-3
    for j in range(3):
        assert np.corrcoef(rs.eofs[:, j], rd.eofs[:, j])[0, 1] > 0.999


def _kernel_outputs():
    rng = np.random.default_rng(99)
    outs = []
    for p in Precision:
        A = mp.from_numpy(rng.uniform(-1, 1, (64, 40)), p)
        B = mp.from_numpy(rng.uniform(-1, 1, (40, 24)), p)
        Sm = mp.from_numpy(covariance_input(40, 0.2) + 0.5 * np.eye(40), p)
        G = mp.from_numpy(rng.uniform(-1, 1, (40, 40)) + 8 * np.eye(40), p)
        U = mp.chol(Sm)
        outs += [
            A + A, A * 3.0, mp.ew_unary("sqrt", mp.ew_unary("abs", A)),
            mp.matmul(A, B), mp.crossprod(A), mp.gemm(A, B, mp.from_numpy(np.ones((64, 24)), p), beta=2.0),
            U, mp.chol2inv(U), mp.forwardsolve(mp.transpose(U), B), mp.backsolve(U, B),
            mp.trsm(U, B.T, side="right", upper=True), mp.solve(G, B), mp.solve(G), *mp.svd(A),
        ]
        outs.append(mp.from_doubles([mp.reduce(op, A) for op in ("sum", "square_sum", "mean", "min", "max")]))
    return [o._data.copy() for o in outs]


def _cli_artifacts(tmp_path, tag, threads):
    out = tmp_path / tag
    runs = [
        ["app", "mala", "--grid", "8", "--iters", "40"],
        ["app", "matern-mle", "--grid", "10"],
        ["app", "pca", "--rows", "200", "--cols", "400"],
        ["app", "laplace", "--n", "60"],
    ]
    for argv in runs:
        assert cli.main(argv + ["--threads", str(threads), "--out", str(out)]) == 0
    files = {}
    for f in sorted(out.iterdir()):
        if f.suffix == ".json":
            s = json.loads(f.read_text())
            s.pop("threads")

            def strip(o):
                if isinstance(o, dict):
                    return {k: strip(v) for k, v in o.items() if k != "elapsed"}
                return o

            files[f.name] = json.dumps(strip(s), sort_keys=True).encode()
        else:
            files[f.name] = f.read_bytes()
    return files


def test_criterion_10_determinism(tmp_path, capsys):
    prev = (_backend.backend_name(), _backend.get_num_threads())
    try:
        with Budget(60.0):
            _backend.set_num_threads(1)
            k1 = _kernel_outputs()
            k1b = _kernel_outputs()
            _backend.set_num_threads(4)
            k4 = _kernel_outputs()
            for x, y, w in zip(k1, k1b, k4):
                assert x.dtype == y.dtype == w.dtype
                assert np.array_equal(x, y) and np.array_equal(x, w)
            a1 = _cli_artifacts(tmp_path, "t1", 1)
            a1b = _cli_artifacts(tmp_path, "t1b", 1)
            a4 = _cli_artifacts(tmp_path, "t4", 4)
            capsys.readouterr()
            assert len(a1) >= 10
            assert a1 == a1b == a4
    finally:
        _backend.use_backend(prev[0])
        _backend.set_num_threads(prev[1])
