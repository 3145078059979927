import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypcross.analysis import (
    SUITES,
    HypothesisError,
    RateCase,
    bernstein_ratio,
    dirichlet_norm_1d,
    lemma_a_sum,
    lemma_b_check,
    nikolskii_check,
    rate_fit,
    records_to_json,
    run_suite,
    theory_rate,
)
from hypcross.index import make_profile
from hypcross.kernels import dn_poly, random_poly
from hypcross.trigpoly import SparseTrigPoly, delta_block


# -- predicted rates -----------------------------------------------------------


def test_t1_example():
    assert theory_rate(RateCase("T1", (1.0, 1.0), 2.0)) == (1.0, 0.5)


def test_t3_example():
    a, b = theory_rate(RateCase("T3", (1.0, 1.0), 2.0, 4.0))
    assert math.isclose(a, 0.75) and math.isclose(b, 0.5)


def test_t1_nu1_matches_g():
    a1, b1 = theory_rate(RateCase("T1", (1.0, 2.0), 3.0))
    ag, bg = theory_rate(RateCase("G", (1.0, 2.0), 3.0))
    assert b1 == 0.0 and (a1, b1) == (ag, bg)


def test_rate_table_values():
    assert theory_rate(RateCase("T1", (1.0, 1.0, 1.0), 4.0)) == (1.0, 1.5)
    assert theory_rate(RateCase("Remark1", (1.0, 2.0, 2.0), 4.0)) == (1.0, 1.5)
    assert theory_rate(RateCase("T2", (1.0, 1.0), 1.0)) == (1.0, 1.0)
    assert theory_rate(RateCase("Remark2", (1.0, 3.0, 3.0), 1.0)) == (1.0, 2.0)
    assert theory_rate(RateCase("T4", (1.0, 1.0, 1.0), 3.0, 1.5)) == (1.0, 1.0)
    assert theory_rate(RateCase("D", (1.0, 1.0), 2.0, 4.0)) == (0.75, 0.0)
    assert theory_rate(RateCase("E1dim", (1.0, 1.0), 3.0, 2.0)) == (1.0, 0.0)
    assert theory_rate(RateCase("T1d1", (2.0,), 3.0)) == (2.0, 0.0)


@pytest.mark.parametrize(
    "case",
    [
        RateCase("T3", (1.0, 1.0), 1.5, 4.0),  # p < 2
        RateCase("T3", (1.0, 1.0), 4.0, 2.0),  # q < p
        RateCase("T3", (0.1, 0.1), 2.0, 4.0),  # r1 too small
        RateCase("T1", (1.0,), 2.0),  # d = 1
        RateCase("T1d1", (1.0, 1.0), 2.0),  # d = 2
        RateCase("T1", (1.0, 1.0), 2.0, 3.0),  # q != p
        RateCase("T2", (1.0, 1.0), 2.0),  # p != 1
        RateCase("T4", (1.0, 1.0), 3.0, 2.5),  # q > 2
        RateCase("E", (1.0, 1.0), 2.0, 3.0),  # q > p
        RateCase("G", (1.0, 1.0), 1.0),  # p = 1
    ],
)
def test_hypothesis_violations(case):
    with pytest.raises(HypothesisError):
        theory_rate(case)


def test_unknown_theorem():
    with pytest.raises(HypothesisError):
        RateCase("T9", (1.0, 1.0), 2.0)


@given(
    st.sampled_from(["T1", "Remark1", "T2", "T3", "T4", "G", "D", "E"]),
    st.lists(st.sampled_from([0.5, 1.0, 1.5, 2.0]), min_size=2, max_size=4),
    st.floats(1.0, 8.0),
    st.floats(1.0, 8.0),
)
def test_theory_rate_total_or_raises(tid, r, p, q):
    case = RateCase(tid, tuple(r), p, q)
    try:
        a, b = theory_rate(case)
    except HypothesisError:
        return
    assert a > 0 and b >= 0
    assert a <= case.profile.r1 + 1e-12


# -- rate fit -------------------------------------------------------------------


def test_rate_fit_exact_models():
    ns = range(6, 21)
    fit = rate_fit([(n, 2.0 ** (-1.5 * n) * n**0.5) for n in ns])
    assert abs(fit.a - 1.5) < 1e-10 and abs(fit.b - 0.5) < 1e-10 and fit.residual < 1e-10
    fit = rate_fit([(n, 2.0**-n) for n in ns])
    assert abs(fit.a - 1) < 1e-10 and abs(fit.b) < 1e-9


def test_rate_fit_noise():
    rng = np.random.default_rng(0)
    ns = range(6, 21)
    fit = rate_fit([(n, 2.0 ** (-n) * n * (1 + 0.01 * rng.standard_normal())) for n in ns])
    assert abs(fit.a - 1) < 0.05


@given(st.floats(1e-6, 1e6))
def test_rate_fit_scale_invariant(c):
    pts = [(n, 2.0 ** (-0.8 * n) * n**0.3 * (1 + 0.05 * math.sin(n))) for n in range(5, 15)]
    f1 = rate_fit(pts)
    f2 = rate_fit([(n, c * v) for n, v in pts])
    assert abs(f1.a - f2.a) < 1e-10 and abs(f1.b - f2.b) < 1e-10


def test_rate_fit_errors():
    with pytest.raises(ValueError):
        rate_fit([(1, 1.0), (2, 0.5), (3, 0.2)])
    with pytest.raises(ValueError):
        rate_fit([(1, 1.0), (2, 0.5), (3, 0.0), (4, 0.1)])
    with pytest.raises(ValueError):
        rate_fit([(5, 1.0), (5, 0.5), (6, 0.2), (6, 0.1)])
    fit = rate_fit([(n, 2.0**-n) for n in range(4, 10)], skip_smallest=2)
    assert fit.window == (6.0, 9.0) and fit.n_points == 4


# -- weighted tail sums ----------------------------------------------------------------------


@pytest.mark.parametrize("l", [1, 3, 7.5, 12])
def test_lemma_a_geometric(l):
    got = lemma_a_sum(1.0, make_profile((1.0,)), l)
    assert math.isclose(got, 2.0 ** (-math.ceil(l)) / (1 - 0.5), rel_tol=1e-12)


def test_lemma_a_direct_summation():
    prof = make_profile((1.0, 1.0))
    # sum over s1 + s2 >= 10 of 2^{-(s1+s2)} = sum_{m >= 10} (m - 1) 2^{-m}
    want = math.fsum((m - 1) * 2.0**-m for m in range(10, 200))
    assert math.isclose(lemma_a_sum(1.0, prof, 10), want, rel_tol=1e-11)


def test_lemma_a_monotone():
    prof = make_profile((1.0, 2.0))
    vals = [lemma_a_sum(1.0, prof, l) for l in range(2, 20)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_lemma_a_rejects_bad_args():
    with pytest.raises(ValueError):
        lemma_a_sum(0.0, make_profile((1.0,)), 3)
    with pytest.raises(ValueError):
        lemma_a_sum(1.0, make_profile((1.0,)), 0.5)


# -- inequalities -----------------------------------------------------------------


def test_nikolskii_exponential():
    rec = nikolskii_check(SparseTrigPoly.exponential((3, 2)), 4.0, 2.0, box=(3, 2))
    assert rec.passed
    assert math.isclose(rec.rhs, 4 * (3 * 2) ** 0.25)


def test_nikolskii_support_violation():
    with pytest.raises(ValueError):
        nikolskii_check(SparseTrigPoly.exponential((5, 1)), 4.0, 2.0, box=(4, 4))


def test_nikolskii_dirichlet_sharpness():
    # ratio of the 1-D Dirichlet kernel tends to a constant as m grows
    ratios = []
    for m in (16, 64, 256):
        t = SparseTrigPoly(1, np.arange(-m, m + 1)[:, None], np.ones(2 * m + 1))
        ratios.append(nikolskii_check(t, 4.0, 2.0).ratio)
    assert all(r <= 1 for r in ratios)
    assert max(ratios) / min(ratios) < 1.1


def test_bernstein_lowest_block_and_shell():
    t = SparseTrigPoly.from_dict(2, {(1, 1): 1.0})
    assert math.isclose(bernstein_ratio(t, 2.0, 1.0), 1.0)
    shell = dn_poly(7, 2)
    ratio = bernstein_ratio(shell, 2.0, 1.0, n=8)
    assert 0.1 * 2**8 < ratio < 2**8
    with pytest.raises(ValueError):
        bernstein_ratio(shell, 2.0, 1.0, n=7)
    with pytest.raises(ValueError):
        bernstein_ratio(SparseTrigPoly.zero(2), 2.0, 1.0)


def test_lemma_b_single_block_is_nikolskii():
    f = delta_block(random_poly(2, [(3, 2)]), (3, 2))
    rec = lemma_b_check(f, 2.0, 4.0)
    assert rec.ratio <= 1.0
    assert lemma_b_check(SparseTrigPoly.zero(2), 2.0, 4.0).lhs == 0.0


@pytest.mark.parametrize("m", [1, 5, 100])
def test_dirichlet_l2(m):
    assert math.isclose(dirichlet_norm_1d(m, 2.0), math.sqrt(2 * m + 1), rel_tol=1e-12)


def test_dirichlet_errors():
    with pytest.raises(ValueError):
        dirichlet_norm_1d(0, 2.0)


# -- suites -------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["parseval", "lemma_a", "dirichlet", "nearbest", "lemma_b"])
def test_fast_suites_pass(name):
    recs = run_suite(name)
    assert recs and all(r.passed for r in recs)


def test_suite_json_schema():
    recs = run_suite("lemma_a")
    data = json.loads(records_to_json(recs))
    assert all(set(d) == {"check", "params", "lhs", "rhs", "ratio", "pass"} for d in data)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
    assert set(SUITES) == {"parseval", "partition", "nikolskii", "bernstein", "lemma_a", "lemma_b", "dirichlet",
                           "nearbest"}
