import json

import pytest

from mpnum import cli
from mpnum.io import read_results


@pytest.fixture(autouse=True)
def _restore(backend):
    yield


def test_bench_csv_stdout(capsys):
    rc = cli.main(["bench", "crossprod", "--sizes", "32", "--reps", "1"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("op,n,precision")
    precs = [l.split(",")[2] for l in lines[1:]]
    assert sorted(precs) == ["double", "half", "single"]


def test_bench_json_file(tmp_path):
    out = tmp_path / "r.json"
    rc = cli.main(["bench", "chol", "--sizes", "16,32", "--reps", "1", "--format", "json", "--out", str(out)])
    assert rc == 0
    recs = read_results(out)
    assert {r.n for r in recs} == {16, 32} and {r.precision for r in recs} == {"single", "double"}
    dbl = [r for r in recs if r.precision == "double"]
    assert all(r.rel_frob_err == 0.0 for r in dbl)


def test_bench_half_restricted(capsys):
    assert cli.main(["bench", "chol", "--sizes", "16", "--precisions", "half"]) == 2
    assert "half" in capsys.readouterr().err
    assert cli.main(["bench", "chol", "--sizes", "16", "--reps", "1", "--precisions", "half,double",
                     "--allow-half-all", "--out", "/dev/null"]) == 0


def test_bench_size_cap():
    assert cli.main(["bench", "gemm", "--sizes", "5000"]) == 2


def test_usage_errors(capsys):
    assert cli.main(["bench", "lu"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["bench", "gemm", "--precisions", "quad"]) == 2
    assert cli.main(["bench", "gemm", "--threads", "0"]) == 2


def test_print_vector_and_matrix(tmp_path, capsys):
    f = tmp_path / "v.csv"
    f.write_text("1\n2\n3\n")
    assert cli.main(["print", str(f), "--precision", "single"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "MPCR Object: 32-Bit Precision on CPU" and out[1] == "Vector Size : 3"
    g = tmp_path / "m.csv"
    g.write_text("1,3\n2,4\n")
    assert cli.main(["print", str(g), "--placement", "GPU"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "MPCR Object: 64-Bit Precision on GPU" and out[2] == "Number of Rows : 2"
    assert cli.main(["print", str(f), "--shape", "matrix"]) == 0
    assert "Number of Columns : 1" in capsys.readouterr().out


def test_print_errors(tmp_path, capsys):
    assert cli.main(["print", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "b.csv"
    bad.write_text("1,x\n")
    assert cli.main(["print", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_app_pca(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["app", "pca", "--rows", "30", "--cols", "20", "--k", "2", "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "pca_summary.json").read_text())
    assert summary["seed"] == 0 and set(summary["results"]) == {"single", "double"}
    assert (out / "pca_eofs_single.csv").exists() and (out / "pca_scores_double.csv").exists()
    assert json.loads(capsys.readouterr().out) == summary


def test_app_laplace_and_mala(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["app", "laplace", "--n", "21", "--precision", "double", "--out", str(out)]) == 0
    head = (out / "laplace_posterior_double.csv").read_text().splitlines()
    assert head[0] == "alpha,posterior" and len(head) == 22
    assert cli.main(["app", "mala", "--grid", "3", "--iters", "5", "--out", str(out)]) == 0
    assert (out / "mala_trace_single.csv").exists()


def test_app_matern_small(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["app", "matern-mle", "--grid", "6", "--precision", "double", "--out", str(out)]) == 0
    s = json.loads((out / "matern-mle_summary.json").read_text())
    assert s["seed"] == 4 and len(s["results"]["double"]["theta"]) == 3


def test_app_caps_and_cleanup(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["app", "mala", "--grid", "41", "--out", str(out)]) == 2
    assert not out.exists()
    # a failing run leaves no partial artefacts behind
    assert cli.main(["app", "pca", "--rows", "5", "--cols", "5", "--k", "9", "--out", str(out)]) == 2
    assert not out.exists()


def test_backend_and_threads_flags(tmp_path, backend):
    rc = cli.main(["app", "pca", "--rows", "10", "--cols", "8", "--backend", "python", "--threads", "2",
                   "--out", str(tmp_path)])
    assert rc == 0
    s = json.loads((tmp_path / "pca_summary.json").read_text())
    assert s["backend"] == "python" and s["threads"] == 2
