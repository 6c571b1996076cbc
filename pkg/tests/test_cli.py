import json
import subprocess
import sys

import numpy as np
import pytest

from buckling_lanczos import cli, matio, problems
from buckling_lanczos.matio import ProblemBundle


@pytest.fixture
def tiny_dir(tmp_path):
    d = tmp_path / "tiny"
    assert cli.main(["gen", "--kind", "tiny", "--out", str(d)]) == 0
    return d


@pytest.fixture
def gen_dir(tmp_path):
    d = tmp_path / "gen"
    assert cli.main(["gen", "--kind", "singular", "--n", "60", "--seed", "3", "--out", str(d)]) == 0
    return d


def solve(capsys, *args):
    code = cli.main(["solve", *args])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_solve_tiny(capsys, tiny_dir):
    code, doc = solve(capsys, "--bundle", str(tiny_dir), "--shift", "1", "--nev", "1")
    assert code == 0
    (pair,) = doc["eigenpairs"]
    assert pair["lambda"] == pytest.approx(0.5, abs=1e-15)
    assert pair["eta"] <= 1e-14 and pair["cos_angle"] <= 1e-14
    assert doc["schema"] == 1


def test_solve_interval_match(capsys, tiny_dir):
    code, doc = solve(capsys, "--bundle", str(tiny_dir), "--shift", "1", "--interval", "-1,1")
    assert code == 0
    assert doc["verdict"]["verdict"] == "MATCH"
    assert doc["count"]["count"] == 1 and doc["verdict"]["found"] == 1


def test_solve_zero_shift(capsys, tiny_dir):
    code, _ = solve(capsys, "--bundle", str(tiny_dir), "--shift", "0")
    assert code == cli.EXIT_USAGE


def test_solve_singular_shift(capsys, tiny_dir):
    code, _ = solve(capsys, "--bundle", str(tiny_dir), "--shift", "0.5")
    assert code == cli.EXIT_SINGULAR


def test_solve_iteration_limit(capsys, gen_dir):
    code, _ = solve(capsys, "--bundle", str(gen_dir), "--shift", "0.3", "--nev", "40",
                    "--maxit", "5")
    assert code == cli.EXIT_MAXIT


def test_solve_individual_paths_and_trace(capsys, tiny_dir, tmp_path):
    trace = tmp_path / "t.csv"
    rep = tmp_path / "r.json"
    code = cli.main(["solve", "--K", str(tiny_dir / "K.mtx"), "--KG", str(tiny_dir / "KG.mtx"),
                     "--ZN", str(tiny_dir / "ZN.mtx"), "--ZC", str(tiny_dir / "ZC.mtx"),
                     "--shift", "1", "--report", str(rep), "--trace", str(trace)])
    assert code == 0
    header, rows = matio.read_trace(trace)
    assert header == ("step", "vnorm", "beta") and len(rows) >= 1
    assert matio.read_report(rep)["eigenpairs"][0]["lambda"] == pytest.approx(0.5)


def test_solve_needs_bundle(capsys):
    assert cli.main(["solve", "--shift", "1"]) == cli.EXIT_USAGE


def test_missing_file(capsys, tmp_path):
    code = cli.main(["solve", "--K", str(tmp_path / "no.mtx"), "--KG", str(tmp_path / "no.mtx"),
                     "--shift", "1"])
    assert code != 0


def test_bad_bases_rejected(capsys, tmp_path):
    b = ProblemBundle.from_arrays(np.diag([1.0, 0, 0]), np.eye(3), ZN=np.eye(3)[:, :1])
    matio.write_bundle_dir(tmp_path, b)
    assert cli.main(["solve", "--bundle", str(tmp_path), "--shift", "1"]) == cli.EXIT_DATA


@pytest.mark.parametrize("method", ["augmented", "reduced"])
def test_count_examples(capsys, tiny_dir, method):
    results = {}
    for flag, val in (("--alpha", "1"), ("--alpha", "-1"), ("--interval", "-1,1")):
        assert cli.main(["count", "--bundle", str(tiny_dir), flag, val, "--method", method]) == 0
        results[(flag, val)] = json.loads(capsys.readouterr().out)
    assert results[("--alpha", "1")]["count"] == 1
    assert results[("--alpha", "-1")]["count"] == 0
    assert results[("--interval", "-1,1")]["count"] == 1
    assert results[("--alpha", "1")]["method"] == method


def test_count_needs_target(capsys, tiny_dir):
    assert cli.main(["count", "--bundle", str(tiny_dir)]) == cli.EXIT_USAGE


def test_canonical_tiny_reversed(capsys, tiny_dir):
    assert cli.main(["canonical", "--bundle", str(tiny_dir), "--reverse"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert (doc["n0"], doc["n1"], doc["n2"], doc["n3"]) == (0, 1, 1, 1)
    assert doc["simultaneously_diagonalizable"] is True


def test_canonical_coupled(capsys, tmp_path):
    b = ProblemBundle.from_arrays(np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, 0.0]))
    matio.write_bundle_dir(tmp_path, b)
    assert cli.main(["canonical", "--bundle", str(tmp_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n0"] == 1
    assert doc["note"] == "not simultaneously diagonalizable"


def test_canonical_generated(capsys, gen_dir):
    assert cli.main(["canonical", "--bundle", str(gen_dir), "--reverse"]) == 0
    doc = json.loads(capsys.readouterr().out)
    truth = json.loads((gen_dir / "truth.json").read_text())
    p = truth["params"]
    assert (doc["n0"], doc["n1"], doc["n2"], doc["n3"]) == (0, p["n1"], p["n2"], p["n3"])


def test_canonical_not_semidefinite(capsys, tiny_dir):
    assert cli.main(["canonical", "--bundle", str(tiny_dir)]) == cli.EXIT_DATA


def test_gen_example1(tmp_path):
    d = tmp_path / "ex"
    assert cli.main(["gen", "--kind", "example1", "--n", "4", "--m", "1", "--out", str(d)]) == 0
    truth = json.loads((d / "truth.json").read_text())
    assert truth["eigenvalues"] == [-3.0, -1.0, 2.0]
    b = matio.read_bundle_dir(d)
    assert b.n == 4 and b.ZN.k == 1 and b.ZC.k == 0


def test_demo_files(capsys, tmp_path):
    code = cli.main(["demo", "--n", "60", "--steps", "12", "--restart", "6", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == {"M", "K", "K_restart6"}
    for tag in summary:
        header, rows = matio.read_trace(tmp_path / f"trace_{tag}.csv")
        assert header == ("step", "vnorm", "beta") and len(rows) == 12
        assert (tmp_path / f"eta_{tag}.csv").exists()


def test_reproducible_report_bytes(tmp_path, gen_dir):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert cli.main(["solve", "--bundle", str(gen_dir), "--shift", "0.3", "--nev", "4",
                         "--seed", "2", "--report", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize("seed", range(3))
def test_methods_agree(tmp_path, seed):
    gp = problems.random_singular(seed, n_max=80)
    matio.write_bundle_dir(tmp_path, gp.bundle)
    lam = np.sort(gp.eigenvalues[gp.eigenvalues > 0])
    shift = str(0.5 * (lam[0] + lam[1]))
    out = {}
    for m in ("augmented", "reduced"):
        rep = tmp_path / f"{m}.json"
        assert cli.main(["solve", "--bundle", str(tmp_path), "--shift", shift, "--nev", "4",
                         "--method", m, "--report", str(rep)]) == 0
        out[m] = sorted(e["lambda"] for e in matio.read_report(rep)["eigenpairs"])
    assert len(out["augmented"]) == len(out["reduced"])
    np.testing.assert_allclose(out["augmented"], out["reduced"], rtol=1e-10)


def test_module_entry_point(tiny_dir):
    r = subprocess.run([sys.executable, "-m", "buckling_lanczos", "solve", "--bundle", str(tiny_dir),
                        "--shift", "0"], capture_output=True, text=True)
    assert r.returncode == 2 and "error" in r.stderr
