"""Acceptance gate: one PASS/FAIL line per criterion."""
import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from buckling_lanczos import canonical, cli, counting, matio, problems
from buckling_lanczos.dense import pinv_apply_oracle
from buckling_lanczos.lanczos import governing_residual, orthogonality_error, run
from buckling_lanczos.transform import build, build_inner_product


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


class Checkpoints:
    """Monitor recording orthogonality and governing residual at every step."""

    def __init__(self, M):
        self.M = M
        self.orth = []
        self.gov = []

    def __call__(self, state):
        self.orth.append(orthogonality_error(state, self.M))
        self.gov.append(governing_residual(state) / (1.0 + np.linalg.norm(state.T(), 1)))


def shift_between(gp):
    lam = np.sort(gp.eigenvalues[gp.eigenvalues > 0])
    return 0.5 * (lam[0] + lam[1])


@pytest.fixture(scope="module")
def example1_runs():
    t0 = time.perf_counter()
    gp = problems.gen_example1(500, 1, 0)
    p = gp.pencil
    sigma = -0.6
    M = build_inner_product(p, HN=np.eye(1), HC=np.zeros((0, 0)))
    chk = Checkpoints(M)
    res = run(build(p, sigma, "reduced"), M, np.ones(p.n), KG=p.KG, maxit=40, monitor=chk)
    demos = {
        "M": problems.demo_norm_growth(500, 1, sigma, 40, "M", None, 0, gp=gp),
        "K": problems.demo_norm_growth(500, 1, sigma, 40, "K", None, 0, gp=gp),
        "K16": problems.demo_norm_growth(500, 1, sigma, 40, "K", 16, 0, gp=gp),
    }
    return {"result": res, "demos": demos, "checks": [chk], "sigma": sigma,
            "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def oracle_runs(singular_pencils):
    t0 = time.perf_counter()
    out = []
    for gp in singular_pencils:
        p = gp.pencil
        s = shift_between(gp)
        M = build_inner_product(p)
        entry = {"gp": gp, "sigma": s, "runs": {}, "checks": []}
        for method in ("augmented", "reduced"):
            op = build(p, s, method)
            chk = Checkpoints(M)
            entry["runs"][method] = (op, run(op, M, KG=p.KG, nev=6, maxit=min(p.n, 100),
                                             monitor=chk))
            entry["checks"].append(chk)
        out.append(entry)
    return {"entries": out, "seconds": time.perf_counter() - t0}


def test_criterion_1_tiny(tmp_path, capsys):
    matio.write_bundle_dir(tmp_path, problems.tiny_pencil().bundle)
    t0 = time.perf_counter()
    code = cli.main(["solve", "--bundle", str(tmp_path), "--shift", "1", "--nev", "1"])
    doc = json.loads(capsys.readouterr().out)
    tiny = problems.tiny_pencil().pencil
    counts = [counting.count_interval(tiny, 1e-3, 1.0, m).count for m in ("augmented", "reduced")]
    counts += [counting.count_half_interval(tiny, 1.0, m).count for m in ("augmented", "reduced")]
    secs = time.perf_counter() - t0
    pairs = doc["eigenpairs"]
    ok = (code == 0 and len(pairs) == 1 and abs(pairs[0]["lambda"] - 0.5) <= 1e-15
          and pairs[0]["eta"] <= 1e-14 and pairs[0]["cos_angle"] <= 1e-14
          and counts == [1, 1, 1, 1] and secs < 0.1)
    p0 = pairs[0] if pairs else {}
    report(1, ok, f"lambda={p0.get('lambda')} eta={p0.get('eta')} cos={p0.get('cos_angle')} "
                  f"counts={counts} time={secs:.3f}s")


def test_criterion_2_example1(example1_runs):
    r = example1_runs
    res, sigma = r["result"], r["sigma"]
    conv = sorted(res.converged, key=lambda q: abs(q.lam - sigma))
    near = conv[: (len(conv) + 1) // 2]
    eta_near = max(q.eta for q in near) if near else np.inf
    m_max = r["demos"]["M"].max_vnorm
    k_max = r["demos"]["K"].max_vnorm
    rs_max = r["demos"]["K16"].max_vnorm
    for q in conv:
        print(f"  lambda={q.lam:+.12f} eta={q.eta:.2e}")
    ok = (len(near) > 0 and eta_near <= 1e-12 and m_max <= 1e2
          and k_max >= 1e4 * m_max and rs_max >= 1e4 * m_max and r["seconds"] < 60)
    report(2, ok, f"converged={len(conv)} near={len(near)} max_eta_near={eta_near:.2e} "
                  f"max|v| M={m_max:.3g} K={k_max:.3g} K+restart={rs_max:.3g} "
                  f"time={r['seconds']:.1f}s")


def test_criterion_3_oracle(oracle_runs):
    t0 = time.perf_counter()
    worst_lam = worst_methods = worst_oracle = 0.0
    rng = np.random.default_rng(0)
    nconv = 0
    for e in oracle_runs["entries"]:
        gp, s = e["gp"], e["sigma"]
        p = gp.pencil
        truth = gp.eigenvalues
        for op, res in e["runs"].values():
            for q in res.converged:
                nconv += 1
                worst_lam = max(worst_lam, np.min(np.abs(truth - q.lam)) / abs(q.lam))
        op1, op2 = e["runs"]["augmented"][0], e["runs"]["reduced"][0]
        V = rng.standard_normal((p.n, 100))
        U1, U2 = op1.apply(V), op2.apply(V)
        for i in range(100):
            u1, u2 = U1[:, i], U2[:, i]
            ref = pinv_apply_oracle(p.K, p.KG, s, V[:, i], null_dim=p.n3)
            nu = np.linalg.norm(u1)
            worst_methods = max(worst_methods, np.linalg.norm(u1 - u2) / nu)
            worst_oracle = max(worst_oracle, np.linalg.norm(u1 - ref) / np.linalg.norm(ref),
                               np.linalg.norm(u2 - ref) / np.linalg.norm(ref))
    secs = oracle_runs["seconds"] + time.perf_counter() - t0
    ok = (nconv > 0 and worst_lam <= 1e-8 and worst_methods <= 1e-10 and worst_oracle <= 1e-9
          and secs < 120)
    report(3, ok, f"pairs={nconv} eig_rel={worst_lam:.1e} methods={worst_methods:.1e} "
                  f"oracle={worst_oracle:.1e} time={secs:.1f}s")


def test_criterion_4_counting(singular_pencils):
    rng = np.random.default_rng(4)
    intervals = mismatches = lemma_fail = 0
    for gp in singular_pencils:
        lams = gp.eigenvalues
        span = 1.2 * np.abs(lams).max()

        def endpoint():
            while True:
                v = rng.uniform(-span, span)
                if np.min(np.abs(lams - v)) >= 1e-6 and abs(v) >= 1e-6:
                    return v

        for _ in range(20):
            a, b = sorted((endpoint(), endpoint()))
            intervals += 1
            c1 = counting.count_interval(gp.pencil, a, b, "augmented")
            c2 = counting.count_interval(gp.pencil, a, b, "reduced")
            truth = counting.brute_force_count(lams, a, b)
            mismatches += not (c1.count == c2.count == truth)
            for (alpha, raw1), (_, raw2) in zip(c1.correction_terms["nu_minus_factor"],
                                                c2.correction_terms["nu_minus_factor"]):
                lemma_fail += raw1 - gp.pencil.n3 != raw2
    ok = mismatches == 0 and lemma_fail == 0
    report(4, ok, f"intervals={intervals} mismatches={mismatches} lemma_failures={lemma_fail}")


def _nullity(X, scale, tol=1e-10):
    if X.size == 0:
        return X.shape[1]
    s = np.linalg.svd(X, compute_uv=False)
    return X.shape[1] - int(np.sum(s > tol * scale))


def _diag_flag(A, B):
    """Dense test: n0 == 0 iff nullity(N^T A N) equals nullity([A; B]), N = basis of N(B)."""
    w, U = np.linalg.eigh(B)
    N = U[:, w <= 1e-10 * np.abs(w).max()]
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    return _nullity(N.T @ A @ N, scale) == _nullity(np.vstack([A, B]), scale)


def test_criterion_5_canonical():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    bad_res = bad_dims = bad_flag = 0
    worst = 0.0
    for i in range(50):
        n0 = int(rng.integers(0, 3))
        n1, n2, n3 = (int(v) for v in rng.integers([1, 0, 0], [30, 10, 6]))
        sp = problems.gen_semidefinite(n0, n1, n2, n3, seed=1000 + i)
        cf = canonical.reduce(sp.A, sp.B)
        ra, rb = cf.residuals(sp.A, sp.B)
        worst = max(worst, ra, rb)
        bad_res += max(ra, rb) > 1e-9
        dims = (cf.n0, cf.n1, cf.n2, cf.n3)
        bad_dims += dims != sp.dims or canonical.dimension_oracle(sp.A, sp.B) != sp.dims
        bad_flag += canonical.is_simultaneously_diagonalizable(cf) != _diag_flag(sp.A, sp.B)
    secs = time.perf_counter() - t0
    ok = bad_res == bad_dims == bad_flag == 0 and secs < 30
    report(5, ok, f"pencils=50 worst_residual={worst:.1e} dim_failures={bad_dims} "
                  f"flag_failures={bad_flag} time={secs:.2f}s")


def test_criterion_6_invariants(example1_runs, oracle_runs):
    checks = list(example1_runs["checks"])
    for e in oracle_runs["entries"]:
        checks += e["checks"]
    orth = max(max(c.orth) for c in checks)
    gov = max(max(c.gov) for c in checks)
    npts = sum(len(c.orth) for c in checks)
    ok = orth <= 1e-10 and gov <= 1e-9
    report(6, ok, f"checkpoints={npts} max_orth={orth:.1e} max_gov={gov:.1e}")
