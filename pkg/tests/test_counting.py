from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, strategies as st

from buckling_lanczos import problems
from buckling_lanczos.counting import (brute_force_count, count_half_interval, count_interval,
                                       shifted_negative_count, small_inertia, validate)
from buckling_lanczos.dense import Inertia
from buckling_lanczos.errors import AlphaOnSpectrum, InputError, ShiftIsZero
from buckling_lanczos.transform import augmented_matrix

METHODS = ["augmented", "reduced"]


@dataclass
class Pair:
    lam: float
    x: np.ndarray
    converged: bool = True


def away_from(lams, rng, lo, hi, gap=1e-6):
    while True:
        v = rng.uniform(lo, hi)
        if np.min(np.abs(lams - v)) >= gap and abs(v) >= gap:
            return v


def test_small_inertia_examples(tiny):
    assert small_inertia(tiny.ZN, tiny.KG) == Inertia(0, 1, 0)
    assert small_inertia(np.zeros((3, 0)), tiny.KG) == Inertia(0, 0, 0)
    gp = problems.gen_singular(3, 2, 1, [0.5, 1.0, -1.0], [1.0, -2.0], seed=4)
    assert small_inertia(gp.pencil.ZN, gp.pencil.KG) == Inertia(1, 1, 0)


@pytest.mark.parametrize("method", METHODS)
def test_half_interval_positive(tiny, method):
    rep = count_half_interval(tiny, 1.0, method)
    assert rep.count == 1 and rep.interval == (0.0, 1.0)
    assert rep.correction_terms["nu_plus_ZtKGZ"] == 0
    assert rep.correction_terms["dim_ZC"] == 1
    raw = rep.correction_terms["nu_minus_factor"][0][1]
    assert raw == (2 if method == "augmented" else 1)


@pytest.mark.parametrize("method", METHODS)
def test_half_interval_negative(tiny, method):
    rep = count_half_interval(tiny, -1.0, method)
    assert rep.count == 0
    assert rep.inertias_used == [(-1.0, 1)]
    assert rep.correction_terms["nu_minus_ZtKGZ"] == 1


@pytest.mark.parametrize("method", METHODS)
def test_interval_composition(tiny, method):
    assert count_interval(tiny, -1.0, 1.0, method).count == 1
    assert count_interval(tiny, 0.25, 1.0, method).count == 1
    assert count_interval(tiny, 0.75, 1.0, method).count == 0
    assert count_interval(tiny, -3.0, -1.0, method).count == 0


@pytest.mark.parametrize("method", METHODS)
def test_endpoint_on_spectrum(tiny, method):
    with pytest.raises(AlphaOnSpectrum):
        count_half_interval(tiny, 0.5, method)


def test_bad_intervals(tiny):
    with pytest.raises(ShiftIsZero):
        count_half_interval(tiny, 0.0)
    with pytest.raises(ShiftIsZero):
        count_interval(tiny, 0.0, 1.0)
    with pytest.raises(InputError):
        count_interval(tiny, 1.0, 1.0)


def test_methods_and_brute_force(singular_pencils):
    rng = np.random.default_rng(0)
    for gp in singular_pencils[:8]:
        lams = gp.eigenvalues
        span = 1.2 * np.abs(lams).max()
        for _ in range(5):
            a, b = sorted(away_from(lams, rng, -span, span) for _ in range(2))
            c1 = count_interval(gp.pencil, a, b, "augmented")
            c2 = count_interval(gp.pencil, a, b, "reduced")
            assert c1.count == c2.count == brute_force_count(lams, a, b)
            assert c1.count >= 0


def test_lemma_inertia_identity(singular_pencils):
    rng = np.random.default_rng(1)
    for gp in singular_pencils[:8]:
        lams = gp.eigenvalues
        for _ in range(4):
            alpha = away_from(lams, rng, lams.min() - 1, lams.max() + 1)
            aug = shifted_negative_count(gp.pencil, alpha, "augmented")
            red = shifted_negative_count(gp.pencil, alpha, "reduced")
            assert aug["inertia"].nminus - gp.pencil.n3 == red["inertia"].nminus


def test_augmented_eigen_structure(singular_pencils):
    for gp in singular_pencils[:5]:
        p = gp.pencil
        alpha = 0.5 * (gp.eigenvalues[0] + gp.eigenvalues[1])
        got = np.sort(np.linalg.eigvalsh(augmented_matrix(p, alpha)))
        w = np.linalg.eigvalsh(p.shifted(alpha))
        nonzero = w[np.argsort(np.abs(w))[p.n3:]]
        sv = np.linalg.svd(p.QC, compute_uv=False)
        expect = np.sort(np.r_[nonzero, sv, -sv])
        np.testing.assert_allclose(got, expect, atol=1e-8 * np.abs(expect).max())


@given(st.floats(0.01, 10.0), st.floats(0.01, 10.0), st.integers(0, 9))
def test_monotone(a1, a2, idx):
    gp = problems.random_singular(idx, n_max=40)
    lo, hi = sorted((a1, a2))
    if np.min(np.abs(gp.eigenvalues - lo)) < 1e-6 or np.min(np.abs(gp.eigenvalues - hi)) < 1e-6:
        return
    assert count_half_interval(gp.pencil, lo).count <= count_half_interval(gp.pencil, hi).count


def test_totals_equal_planted(singular_pencils):
    for gp in singular_pencils[:6]:
        big = 10 * np.abs(gp.eigenvalues).max()
        total = (count_half_interval(gp.pencil, -big).count
                 + count_half_interval(gp.pencil, big).count)
        assert total == len(gp.truth)


def _pairs(gp):
    return [Pair(lam, x) for lam, x in gp.truth]


def test_validate_match_and_missing(tiny):
    gp = problems.gen_singular(4, 1, 1, [1.0, 0.5, -0.5, 0.25], [1.0], seed=2)
    rep = count_interval(gp.pencil, -3.0, 3.0)
    assert rep.count == 3
    pairs = _pairs(gp)
    v = validate(rep, pairs)
    assert v.ok and str(v) == "MATCH"
    inside = [q for q in pairs if -3 < q.lam < 3]
    assert str(validate(rep, inside[1:])) == "MISSING(1)"


def test_validate_surplus():
    gp = problems.gen_singular(2, 1, 1, [1.0, 0.5], [1.0], seed=2)
    rep = count_interval(gp.pencil, 0.5, 1.5)
    assert str(validate(rep, _pairs(gp))) == "MATCH"
    fake = Pair(1.25, np.ones(gp.pencil.n))
    assert str(validate(rep, _pairs(gp) + [fake])) == "SURPLUS(1)"


def test_validate_double_eigenvalue_duplicate():
    gp = problems.gen_singular(4, 1, 1, [0.5, 0.5, 1.0, -1.0], [1.0], seed=3)
    rep = count_interval(gp.pencil, 1.5, 2.5)
    assert rep.count == 2
    pairs = _pairs(gp)
    dup = Pair(pairs[0].lam * (1 + 1e-12), pairs[0].x.copy())
    assert str(validate(rep, pairs + [dup])) == "MATCH"
    # only one of the two independent vectors found
    assert str(validate(rep, [pairs[0], dup])) == "MISSING(1)"


def test_unconverged_pairs_ignored():
    gp = problems.gen_singular(2, 1, 1, [1.0, 0.5], [1.0], seed=2)
    rep = count_interval(gp.pencil, 0.5, 1.5)
    pairs = [Pair(lam, x, converged=False) for lam, x in gp.truth]
    assert str(validate(rep, pairs)) == "MISSING(1)"


def test_report_serializable(tiny):
    d = count_interval(tiny, -1.0, 1.0).to_dict()
    assert d["count"] == 1 and d["method"] == "augmented"
    assert d["correction_terms"]["dim_ZC"] == 1
