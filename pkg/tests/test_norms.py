import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypcross.kernels import a_block_apply, dn_poly, random_poly, w1_representative
from hypcross.norms import NormSpec, besov_norm, block_norms, bq1_norm, h_norm, lp_norm, lp_norm_tensor, norm
from hypcross.trigpoly import QuadratureGrid, SparseTrigPoly, TensorBlockPoly, delta_block

REGION = [(1, 1), (1, 2), (2, 1), (3, 2), (2, 4)]
polys = st.integers(0, 10_000).map(lambda seed: random_poly(seed, REGION))


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, 7.0])
def test_exponential_has_unit_norm(p):
    assert math.isclose(lp_norm(SparseTrigPoly.exponential((3, -5)), p), 1.0, rel_tol=1e-12)


def test_one_plus_cos():
    f = SparseTrigPoly.from_dict(1, {(0,): 1.0, (1,): 0.5, (-1,): 0.5})
    assert math.isclose(lp_norm(f, 2.0), math.sqrt(1.5), rel_tol=1e-14)


@given(polys, st.sampled_from([2.0, 4.0, 6.0]))
def test_quadrature_exact_for_even_p(f, p):
    coarse = lp_norm(f, p)
    fine = lp_norm(f, p, grid=QuadratureGrid.for_bandwidth(f.max_freq, 16.0))
    assert math.isclose(coarse, fine, rel_tol=1e-12)


@given(polys)
def test_parseval(f):
    assert math.isclose(lp_norm(f, 2.0), f.l2(), rel_tol=1e-10)


def test_lp_norm_rejects_bad_p():
    f = SparseTrigPoly.exponential((1,))
    for p in (0.5, math.inf):
        with pytest.raises(ValueError):
            lp_norm(f, p)


def test_tensor_fast_paths_agree_with_dense():
    dn = dn_poly(6, 2)
    for p in (1.0, 3.0, 4.0):
        assert math.isclose(lp_norm(dn, p), lp_norm(dn.to_sparse(), p), rel_tol=1e-9)
    t = dn.terms[0]
    assert math.isclose(lp_norm_tensor(t, 2.0), math.prod(fac.l2() for fac in t.factors), rel_tol=1e-12)
    w = w1_representative((1.0, 1.0), 0.0, 40)
    assert math.isclose(lp_norm(w, 1.0), lp_norm(w.to_sparse(), 1.0), rel_tol=1e-9)


def test_norm_dispatch_parseval():
    dn = dn_poly(5, 3)
    assert math.isclose(norm(dn, 2.0), math.sqrt(dn.support_size()), rel_tol=1e-12)


def test_bq1_single_block():
    f = delta_block(random_poly(1, REGION), (2, 4))
    assert math.isclose(bq1_norm(f, 3.0), lp_norm(f, 3.0), rel_tol=1e-12)


@given(polys, st.sampled_from([1.5, 2.0, 4.0]))
def test_lq_below_bq1(f, q):
    assert lp_norm(f, q) <= bq1_norm(f, q) * (1 + 1e-12)


def test_bq1_delta_rejects_q1():
    with pytest.raises(ValueError):
        bq1_norm(SparseTrigPoly.exponential((1, 1)), 1.0, "delta")
    with pytest.raises(ValueError):
        NormSpec("bq1", 1.0)


def test_bq1_of_dn_via_blocks():
    dn = dn_poly(7, 2)
    ref = sum(lp_norm(TensorBlockPoly(2, [t]).to_sparse(), 4.0) for t in dn.terms)
    assert math.isclose(bq1_norm(dn, 4.0), ref, rel_tol=1e-10)


def test_a_kernel_block_norms_match_direct():
    f = random_poly(3, REGION)
    bn = block_norms(f, 1.0, "a_kernel")
    for s, v in bn.items():
        assert math.isclose(v, lp_norm(a_block_apply(f, s), 1.0), rel_tol=1e-10)
    # every nonzero A_s(f) is listed
    for s in [(1, 1), (3, 3), (4, 5)]:
        if s not in bn:
            assert a_block_apply(f, s).is_zero


def test_a_kernel_separable_matches_sparse():
    w = w1_representative((1.0, 1.0), 0.0, 24)
    a = block_norms(w, 1.0, "a_kernel")
    b = block_norms(w.to_sparse(), 1.0, "a_kernel")
    assert a.keys() == b.keys()
    for s in a:
        assert math.isclose(a[s], b[s], rel_tol=1e-9)


def test_besov_single_block():
    f = delta_block(random_poly(1, REGION), (3, 2))
    r = (1.0, 0.5)
    want = 2 ** (3 * 1.0 + 2 * 0.5) * lp_norm(f, 2.0)
    assert math.isclose(besov_norm(f, r, 2.0, 1.0), want, rel_tol=1e-12)
    assert math.isclose(h_norm(f, r, 2.0), want, rel_tol=1e-12)


def test_h_norm_exponential():
    e = SparseTrigPoly.exponential((5, -2))  # block (3, 2)
    assert math.isclose(h_norm(e, (1.0, 1.0), 3.0), 2.0**5, rel_tol=1e-12)


@given(polys, st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_h_norm_homogeneous(f, c):
    assert math.isclose(h_norm(f * c, (1, 1), 2.0), abs(c) * h_norm(f, (1, 1), 2.0), rel_tol=1e-12)


@given(polys)
def test_besov_monotone_in_theta(f):
    vals = [besov_norm(f, (1.0, 1.0), 2.0, th) for th in (1.0, 2.0, 4.0, math.inf)]
    assert all(a >= b * (1 - 1e-12) for a, b in zip(vals, vals[1:]))


def test_h_sup_a_kernel_tail_bound():
    # ||A_s(f)||_1 <= 2^{-(s,r)} when the A_s-mode H norm is 1
    f = random_poly(8, REGION)
    r = (1.0, 1.0)
    f = f * (1.0 / h_norm(f, r, 1.0, mode="a_kernel"))
    for s, v in block_norms(f, 1.0, "a_kernel").items():
        assert v <= 2.0 ** (-sum(s)) * (1 + 1e-12)


def test_normspec_parse_and_label():
    for text in ("lq:4", "bq1:2", "bq1a:1"):
        assert NormSpec.parse(text).label == text
    assert NormSpec.parse("lp:3").label == "lq:3"
    for bad in ("lq", "xx:2", "lq:abc", "bq1:1"):
        with pytest.raises(ValueError):
            NormSpec.parse(bad)
    with pytest.raises(ValueError):
        NormSpec("besov", 2.0)


def test_normspec_evaluate():
    f = random_poly(2, REGION)
    assert NormSpec.parse("lq:2").evaluate(f) == pytest.approx(f.l2(), rel=1e-12)
    assert NormSpec("h_sup", 2.0, r=(1.0, 1.0)).evaluate(f) == pytest.approx(h_norm(f, (1, 1), 2.0))
    assert np.isfinite(NormSpec("besov", 2.0, theta=2.0, r=(1.0, 1.0)).evaluate(f))
