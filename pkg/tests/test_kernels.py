import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypcross.index import CrossSpec, block_of, make_profile
from hypcross.kernels import (
    LCG_INC,
    LCG_MUL,
    MultiplierSpec,
    a_block_apply,
    a_blocks_touching,
    a_support_1d,
    a_weight_1d,
    apply_multiplier,
    as_weight,
    bernoulli_coeffs,
    bernoulli_tensor,
    dn_poly,
    g1_poly,
    lcg_stream,
    random_poly,
    tail_extremal_l2,
    vp_weight,
    w1_representative,
)
from hypcross.norms import lp_norm
from hypcross.trigpoly import convolve, weyl_derivative


def test_vp_weight_ramp():
    assert vp_weight(4, 3) == 1.0
    assert vp_weight(4, 4) == 1.0
    assert vp_weight(4, 6) == 0.5
    assert vp_weight(4, 8) == 0.0
    assert vp_weight(4, -5) == 0.75
    with pytest.raises(ValueError):
        vp_weight(0, 1)


def test_a_weight_lowest_block_fix():
    # s = 1 covers |k| = 1 fully and ramps out by |k| = 4
    assert a_weight_1d(1, 1) == 1.0
    assert a_weight_1d(1, 0) == 0.0
    assert a_weight_1d(1, 3) == 0.5
    assert a_weight_1d(1, 4) == 0.0


@given(st.integers(1, 10), st.integers(-3000, 3000))
def test_a_weight_support(s, k):
    lo, hi = a_support_1d(s)
    if not lo < abs(k) < hi:
        assert a_weight_1d(s, k) == 0.0


@given(st.integers(1, 2000))
def test_a_partition_1d_exact(k):
    total = sum(a_weight_1d(s, k) for s in range(1, 14))
    assert total == 1.0


def test_as_weight_product_and_zero_axis():
    assert as_weight((1, 2), (1, 3)) == 1.0 * float(a_weight_1d(2, 3))
    with pytest.raises(ValueError):
        as_weight((1, 1), (0, 1))


@given(st.tuples(st.integers(1, 8), st.integers(1, 8)))
def test_a_blocks_touching_is_complete(block):
    # every s with A_s nonzero somewhere on rho(block) is listed
    listed = set(a_blocks_touching(block))
    for s in itertools.product(range(1, 10), repeat=2):
        lo = [1 << (b - 1) for b in block]
        hi = [(1 << b) - 1 for b in block]
        nonzero = all(
            any(a_weight_1d(sj, k) != 0 for k in range(l, h + 1)) for sj, l, h in zip(s, lo, hi)
        )
        assert nonzero == (s in listed)


def test_multiplier_validation():
    with pytest.raises(ValueError):
        MultiplierSpec("a_block", ((0, 1),), 2)
    with pytest.raises(ValueError):
        MultiplierSpec("bernoulli", ((1.0, -1.0), 0.0), 2)
    with pytest.raises(ValueError):
        MultiplierSpec("nope", (), 1)


def test_bernoulli_inverts_weyl():
    f = random_poly(2, [(1, 1), (2, 3)])
    g = apply_multiplier(f, MultiplierSpec("bernoulli", ((1.5, 0.5), (0.2, 1.0)), 2))
    h = weyl_derivative(g, (1.5, 0.5), (0.2, 1.0))
    assert h.allclose(f)


def test_bernoulli_tensor_matches_sparse():
    region = [(1, 1), (2, 3), (4, 1)]
    a = bernoulli_tensor((1.0, 2.0), (0.5, 0.0), region).to_sparse()
    b = bernoulli_coeffs((1.0, 2.0), (0.5, 0.0), region)
    assert a.allclose(b)
    assert bernoulli_coeffs((1.0, 1.0), 0.0, [], d=2).is_zero


def test_bernoulli_is_convolution_kernel():
    # f = phi * F_r  <=>  f^{(r)} = phi
    region = [(1, 2), (3, 1)]
    phi = random_poly(9, region)
    F = bernoulli_coeffs((1.0, 1.0), (0.0, 0.0), region)
    f = convolve(phi, F)
    assert weyl_derivative(f, 1.0, 0.0).allclose(phi)


def test_a_block_apply_adjacency():
    f = random_poly(4, [(s1, s2) for s1 in range(1, 6) for s2 in range(1, 6)])
    a = a_block_apply(f, (2, 2))
    keys = a.keys
    assert all(max(abs(v) for v in k) < 8 for k in keys)
    # A_s A_s' = 0 for far blocks
    assert a_block_apply(a, (4, 2)).is_zero
    assert not a_block_apply(a, (3, 2)).is_zero


def test_dn_poly_support():
    dn = dn_poly(6, 3)
    sp = dn.to_sparse()
    assert all(sum(block_of(k)) == 6 for k in sp.keys)
    assert np.allclose(sp.vals, 1.0)


def test_dn_tensor_norm_matches_dense():
    dn = dn_poly(7, 2)
    assert math.isclose(lp_norm(dn, 4.0), lp_norm(dn.to_sparse(), 4.0), rel_tol=1e-10)
    # block of d_n: product of 1-D norms
    t = dn.terms[2]
    from hypcross.norms import lp_norm_tensor
    from hypcross.trigpoly import TensorBlockPoly

    dense = lp_norm(TensorBlockPoly(2, [t]).to_sparse(), 3.0)
    assert math.isclose(lp_norm_tensor(t, 3.0), dense, rel_tol=1e-8)


@pytest.mark.parametrize("p", [2.0, 4.0, 3.0])
def test_g1_normalisation(p):
    g, c5 = g1_poly(8, p, 1.0, 2)
    d = weyl_derivative(g, 1.0, 0.0)
    assert math.isclose(lp_norm(d, p), 1.0, rel_tol=1e-9)
    assert c5 > 0


def test_g1_rejects_anisotropic_profile():
    with pytest.raises(ValueError):
        g1_poly(8, 2.0, make_profile((1.0, 2.0)))


def test_tail_extremal_l2_unit_phi():
    prof = make_profile((1.0, 1.0))
    f = tail_extremal_l2(8, prof, depth=5)
    phi = weyl_derivative(f, prof.r, 0.0)
    assert math.isclose(phi.l2(), 1.0, rel_tol=1e-12)
    spec = CrossSpec(8, prof.gamma_prime)
    assert not any(spec.contains_block(s) for s in f.block_tags)


def test_lcg_matches_sequential_recurrence():
    x, ref = 12345, []
    for _ in range(3000):
        x = (LCG_MUL * x + LCG_INC) % 2**64
        ref.append(x)
    assert [int(v) for v in lcg_stream(12345, 3000)] == ref


def test_random_poly_deterministic():
    a = random_poly(17, [(1, 2), (3, 3)])
    b = random_poly(17, [(3, 3), (1, 2)])
    assert a.allclose(b, atol=0)
    assert np.allclose(np.abs(a.vals), 1.0)
    assert not a.allclose(random_poly(18, [(1, 2), (3, 3)]))


def test_w1_representative_kernel_is_l1_normalised():
    f = w1_representative((1.0, 1.0), 0.0, 64)
    assert f.zero_mean
    # undo the Bernoulli multiplier on the nonzero frequencies: Fejer coefficients
    k, c = f.terms[0].factors[0].coefficients()
    nz = k != 0
    assert np.allclose((c[nz] * np.abs(k[nz])).real, 1 - np.abs(k[nz]) / 65)
