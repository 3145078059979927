"""Kernels, Fourier multipliers and extremal-function generators.

* de la Vallee Poussin weights ``v_l(k)``: 1 up to ``l``, linear ramp to 0 at ``2l``.
* the dyadic system ``A_s`` built from differences of ``V_{2^{s_j}}``.
* the multivariate Bernoulli kernel ``F_r(x, alpha)``.
* ``d_n``, ``g_1`` and the tail extremal used in the lower-bound constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hypcross.index import (
    BlockIndex,
    CrossSpec,
    SmoothnessProfile,
    blocks_in_band,
    dot,
    rho_block,
    shell,
)
from hypcross.trigpoly import (
    BlockFactor,
    Factor1D,
    Poly,
    SeparableSum,
    SparseTrigPoly,
    TensorBlockPoly,
    TensorTerm,
    block_factor_values,
    weyl_derivative,
)

# ---------------------------------------------------------------------------
# de la Vallee Poussin and A_s weights


def vp_weight(l: int, k):
    """Fourier multiplier of ``V_l``: 1 for ``|k| <= l``, ``1 - (|k| - l)/l`` below ``2l``, else 0."""
    if int(l) < 1:
        raise ValueError("V_l needs l >= 1")
    l = int(l)
    ak = np.abs(np.asarray(k, dtype=np.int64))
    w = np.clip(2.0 - ak / l, 0.0, 1.0)
    return float(w) if w.ndim == 0 else w


def a_weight_1d(s: int, k):
    """One-dimensional factor of ``A_s``.

    ``v_{2^s} - v_{2^{s-1}}`` for ``s >= 2``. For ``s = 1`` the lower kernel is
    replaced by the projector onto frequency 0, so that the factors sum to one
    on every ``k != 0``.
    """
    if int(s) < 1:
        raise ValueError("block index must be >= 1")
    s = int(s)
    ak = np.asarray(k, dtype=np.int64)
    upper = vp_weight(1 << s, ak)
    lower = vp_weight(1 << (s - 1), ak) if s >= 2 else (ak == 0).astype(np.float64)
    return upper - lower


def as_weight(s: Sequence[int], k: Sequence[int]) -> float:
    """Multiplier of ``A_s`` at a single frequency ``k`` (all ``k_j`` non-zero)."""
    if len(s) != len(k):
        raise ValueError("s and k differ in dimension")
    if any(int(v) == 0 for v in k):
        raise ValueError(f"frequency {tuple(k)} has a zero coordinate")
    return float(math.prod(float(a_weight_1d(sj, kj)) for sj, kj in zip(s, k)))


def as_weights(s: Sequence[int], keys: np.ndarray) -> np.ndarray:
    """Vectorised ``A_s`` multiplier for the rows of ``keys`` (zero where some ``k_j = 0``)."""
    keys = np.asarray(keys, dtype=np.int64)
    w = np.ones(len(keys))
    for j, sj in enumerate(s):
        w = w * a_weight_1d(sj, keys[:, j])
    return w


def a_support_1d(s: int) -> tuple[int, int]:
    """Open range ``(lo, hi)`` of ``|k|`` where the 1-D ``A_s`` factor can be non-zero."""
    return (0 if s == 1 else 1 << (s - 1), 1 << (s + 1))


def a_blocks_touching(block: Sequence[int]) -> list[BlockIndex]:
    """Indices ``s`` whose ``A_s`` is non-zero somewhere on ``rho(block)``."""
    import itertools

    opts = [[b - 1, b] if b >= 2 else [b] for b in block]
    return [tuple(t) for t in itertools.product(*opts)]


# ---------------------------------------------------------------------------
# multipliers


@dataclass(frozen=True)
class MultiplierSpec:
    """A tensor-product Fourier multiplier.

    ``kind`` is ``"valle_poussin"`` (params ``l``), ``"a_block"`` (params ``s``)
    or ``"bernoulli"`` (params ``(r, alpha)``).
    """

    kind: str
    params: tuple
    d: int

    def __post_init__(self) -> None:
        if self.kind == "valle_poussin":
            (l,) = self.params
            ls = (int(l),) * self.d if np.isscalar(l) else tuple(int(v) for v in l)
            if len(ls) != self.d or min(ls) < 1:
                raise ValueError("valle_poussin needs l >= 1 per dimension")
            object.__setattr__(self, "params", (ls,))
        elif self.kind == "a_block":
            (s,) = self.params
            s = tuple(int(v) for v in s)
            if len(s) != self.d or min(s) < 1:
                raise ValueError("a_block needs a block index of length d with entries >= 1")
            object.__setattr__(self, "params", (s,))
        elif self.kind == "bernoulli":
            r, alpha = self.params
            r = (float(r),) * self.d if np.isscalar(r) else tuple(float(v) for v in r)
            alpha = (float(alpha),) * self.d if np.isscalar(alpha) else tuple(float(v) for v in alpha)
            if len(r) != self.d or len(alpha) != self.d or min(r) <= 0:
                raise ValueError("bernoulli needs r_j > 0 and alpha of length d")
            object.__setattr__(self, "params", (r, alpha))
        else:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")

    def weights_1d(self, j: int, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        if self.kind == "valle_poussin":
            return np.asarray(vp_weight(self.params[0][j], k), dtype=np.complex128)
        if self.kind == "a_block":
            return np.asarray(a_weight_1d(self.params[0][j], k), dtype=np.complex128)
        r, alpha = self.params
        out = np.zeros(len(k), dtype=np.complex128)
        nz = k != 0
        out[nz] = block_factor_values(k[nz], -r[j], -alpha[j])
        return out

    def weights(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, self.d)
        w = np.ones(len(keys), dtype=np.complex128)
        for j in range(self.d):
            w = w * self.weights_1d(j, keys[:, j])
        return w


def apply_multiplier(f: Poly, m: MultiplierSpec) -> Poly:
    """Coefficient-wise product of ``f`` with the multiplier ``m``."""
    if f.d != m.d:
        raise ValueError(f"dimension mismatch: polynomial d={f.d}, multiplier d={m.d}")
    if isinstance(f, SeparableSum):
        if m.kind == "bernoulli":
            r, alpha = m.params
            return weyl_derivative(f, [-v for v in r], [-v for v in alpha])

        def mul(j: int, fac: Factor1D) -> Factor1D:
            return fac.multiply(lambda k: m.weights_1d(j, k))

        out = SeparableSum(f.d, [TensorTerm(t.weight, tuple(mul(j, x) for j, x in enumerate(t.factors))) for t in f.terms])
        return SeparableSum(f.d, [t for t in out.terms if all(len(x.coefficients()[0]) for x in t.factors)])
    return f.with_values(f.vals * m.weights(f.keys))


def a_block_apply(f: Poly, s: Sequence[int]) -> Poly:
    return apply_multiplier(f, MultiplierSpec("a_block", (tuple(s),), f.d))


# ---------------------------------------------------------------------------
# Bernoulli kernel


def bernoulli_coeffs(r, alpha, region: Sequence[Sequence[int]], d: int | None = None) -> SparseTrigPoly:
    """Coefficients ``prod |k_j|^{-r_j} e^{-i sign(k_j) alpha_j pi/2}`` of ``F_r`` on the union of ``rho(s)``.

    An empty region gives the zero polynomial (``d`` must then be supplied or
    inferred from ``r``).
    """
    region = [tuple(int(v) for v in s) for s in region]
    if d is None:
        d = len(region[0]) if region else (1 if np.isscalar(r) else len(r))
    m = MultiplierSpec("bernoulli", (r, alpha), d)
    if not region:
        return SparseTrigPoly(d)
    keys = np.concatenate([rho_block(s) for s in sorted(set(region))])
    return SparseTrigPoly(d, keys, m.weights(keys))


def bernoulli_tensor(r, alpha, region: Sequence[Sequence[int]], d: int | None = None) -> TensorBlockPoly:
    """Same as :func:`bernoulli_coeffs`, kept in rank-1-per-block form."""
    region = sorted(set(tuple(int(v) for v in s) for s in region))
    if d is None:
        d = len(region[0]) if region else (1 if np.isscalar(r) else len(r))
    m = MultiplierSpec("bernoulli", (r, alpha), d)
    rr, aa = m.params
    terms = [
        TensorTerm(1.0 + 0j, tuple(BlockFactor(sj, -rr[j], -aa[j]) for j, sj in enumerate(s)), s) for s in region
    ]
    return TensorBlockPoly(d, terms)


def tail_margin(r1: float, nu: int, level: float, rel: float = 1e-3) -> int:
    """Extra levels ``m`` with ``2^{-m r1} ((level+m)/level)^{nu-1} < rel``."""
    m = 1
    while 2.0 ** (-m * r1) * ((level + m) / max(level, 1.0)) ** (nu - 1) >= rel:
        m += 1
    return m


def bernoulli_region(profile: SmoothnessProfile, n: float, margin: int | None = None) -> list[BlockIndex]:
    """Blocks with ``(s, gamma) < n + margin`` (margin from the weighted geometric tail bound by default)."""
    if margin is None:
        margin = tail_margin(profile.r1, profile.nu, n)
    return blocks_in_band(profile.gamma, -math.inf, n + margin)


# ---------------------------------------------------------------------------
# d_n and g_1


def dn_poly(n: int, d: int) -> TensorBlockPoly:
    """``d_n(x) = sum_{||s||_1 = n} sum_{k in rho(s)} e^{i(k,x)}``, one rank-1 term per block."""
    return TensorBlockPoly(d, [TensorTerm(1.0 + 0j, tuple(BlockFactor(sj) for sj in s), s) for s in shell(n, d)])


def g1_scale(n: int, p: float, r1: float, d: int) -> float:
    return 2.0 ** (-n * (r1 + 1.0 - 1.0 / p)) * n ** (-(d - 1) / p)


def g1_poly(n: int, p: float, profile: SmoothnessProfile | float, d: int | None = None,
            oversample: float | None = None) -> tuple[TensorBlockPoly, float]:
    """The normalised lower-bound function ``g_1 = C_5 2^{-n(r_1+1-1/p)} n^{-(d-1)/p} d_n``.

    ``C_5`` is computed so that ``||g_1^{(r)}||_p = 1`` with ``r = (r_1, ..., r_1)``
    and ``alpha = 0``. Returns ``(g_1, C_5)``.
    """
    from hypcross.norms import lp_norm

    if isinstance(profile, SmoothnessProfile):
        if profile.nu != profile.d:
            raise ValueError("g_1 needs an isotropic profile r = (r_1, ..., r_1)")
        r1, d = profile.r1, profile.d
    else:
        r1 = float(profile)
        if d is None:
            raise ValueError("dimension required when r_1 is given as a number")
    if p < 1:
        raise ValueError("p must be >= 1")
    dn = dn_poly(n, d)
    if dn.is_zero:
        raise ValueError(f"d_n is empty for n={n} < d={d}")
    scale = g1_scale(n, p, r1, d)
    deriv = weyl_derivative(dn, [r1] * d, [0.0] * d)
    nrm = deriv.l2() if p == 2 else lp_norm(deriv, p, oversample=oversample)
    c5 = 1.0 / (scale * nrm)
    return dn.scaled(c5 * scale), c5


# ---------------------------------------------------------------------------
# tail extremal for the L_2 case


def block_rms_multiplier(s: Sequence[int], r: Sequence[float]) -> float:
    """``||delta_s(F_r)||_2 / |rho(s)|^{1/2}``: RMS of ``prod |k_j|^{-r_j}`` over the block."""
    return math.prod(BlockFactor(sj, -rj).l2() / math.sqrt(1 << sj) for sj, rj in zip(s, r))


def tail_blocks(spec: CrossSpec, depth: int) -> list[BlockIndex]:
    return blocks_in_band(spec.weights, spec.n, spec.n + depth)


def tail_extremal_l2(n: float, profile: SmoothnessProfile, spec: CrossSpec | None = None, depth: int = 8,
                     alpha=0.0, weighting: str = "dyadic") -> TensorBlockPoly:
    """``f = phi * F_r`` with ``||phi||_2 = 1`` concentrated on the tail of the cross.

    ``phi`` has constant-modulus coefficients on each block with
    ``n <= (s, w) < n + depth`` (``w`` the cross weights, ``gamma'`` by default).
    The block ``l_2`` masses of ``phi`` are proportional to ``2^{-(s,r)}``
    (``weighting="dyadic"``) or to the actual RMS multiplier of ``F_r`` on the
    block (``weighting="exact"``, the equality case of Cauchy-Schwarz).
    """
    if spec is None:
        spec = CrossSpec(n, profile.gamma_prime)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    d = profile.d
    blocks = tail_blocks(spec, depth)
    if not blocks:
        raise ValueError(f"no tail blocks with {spec.n} <= (s, w) < {spec.n + depth}")
    r = profile.r
    alpha = (float(alpha),) * d if np.isscalar(alpha) else tuple(float(a) for a in alpha)
    if weighting == "dyadic":
        mass = np.array([2.0 ** (-dot(s, r)) for s in blocks])
    elif weighting == "exact":
        mass = np.array([block_rms_multiplier(s, r) for s in blocks])
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    mass = mass / np.sqrt(np.sum(mass**2))
    terms = []
    for s, w in zip(blocks, mass):
        c = w / math.sqrt(1 << int(sum(s)))
        terms.append(TensorTerm(complex(c), tuple(BlockFactor(sj, -r[j], -alpha[j]) for j, sj in enumerate(s)), s))
    return TensorBlockPoly(d, terms)


# ---------------------------------------------------------------------------
# reproducible random polynomials

LCG_MUL = 6364136223846793005
LCG_INC = 1442695040888963407
_MASK = (1 << 64) - 1
_LANES = 1024


def lcg_stream(seed: int, count: int) -> np.ndarray:
    """``count`` successive states of the 64-bit LCG started at ``seed``.

    ``x_{i+1} = a x_i + c mod 2^64``; the returned array holds ``x_1 .. x_count``.
    Computed in interleaved lanes, bit-identical to the sequential recurrence.
    """
    if count <= 0:
        return np.zeros(0, dtype=np.uint64)
    lanes = min(_LANES, count)
    first = np.empty(lanes, dtype=np.uint64)
    x = int(seed) & _MASK
    for i in range(lanes):
        x = (LCG_MUL * x + LCG_INC) & _MASK
        first[i] = x
    # composite step: x -> A x + C advances by `lanes` states
    a_l, c_l = 1, 0
    for _ in range(lanes):
        a_l, c_l = (LCG_MUL * a_l) & _MASK, (LCG_MUL * c_l + LCG_INC) & _MASK
    steps = -(-count // lanes)
    out = np.empty((steps, lanes), dtype=np.uint64)
    out[0] = first
    a_arr, c_arr = np.uint64(a_l), np.uint64(c_l)
    with np.errstate(over="ignore"):
        for t in range(1, steps):
            out[t] = out[t - 1] * a_arr + c_arr
    return out.ravel()[:count]


def lcg_uniform(seed: int, count: int) -> np.ndarray:
    """Uniforms in ``[0, 1)`` from the top 53 bits of successive LCG states."""
    return (lcg_stream(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def random_poly(seed: int, region: Sequence[Sequence[int]], law: str = "unit", d: int | None = None) -> SparseTrigPoly:
    """Seeded random polynomial supported on the union of ``rho(s)`` over ``region``.

    Blocks are filled in lexicographic order, frequencies within a block in
    lexicographic order. ``law="unit"``: a uniform complex unit times a
    Rademacher sign. ``law="gaussian"``: standard complex Gaussian.
    """
    region = sorted(set(tuple(int(v) for v in s) for s in region))
    if not region:
        if d is None:
            raise ValueError("empty region needs an explicit dimension")
        return SparseTrigPoly(d)
    d = len(region[0])
    keys = np.concatenate([rho_block(s) for s in region])
    u = lcg_uniform(seed, 2 * len(keys)).reshape(-1, 2)
    if law == "unit":
        sign = np.where(u[:, 1] < 0.5, -1.0, 1.0)
        vals = sign * np.exp(2j * np.pi * u[:, 0])
    elif law == "gaussian":
        rad = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        vals = rad * np.exp(2j * np.pi * u[:, 1]) / math.sqrt(2.0)
    else:
        raise ValueError(f"unknown amplitude law {law!r}")
    return SparseTrigPoly(d, keys, vals)


def random_region(seed: int, candidates: Sequence[BlockIndex], fraction: float = 0.5) -> list[BlockIndex]:
    """Seeded subset of ``candidates`` (never empty when candidates exist)."""
    candidates = sorted(candidates)
    if not candidates:
        return []
    u = lcg_uniform(seed ^ 0x9E3779B97F4A7C15, len(candidates))
    chosen = [s for s, x in zip(candidates, u) if x < fraction]
    return chosen or [candidates[int(np.argmin(u))]]


# ---------------------------------------------------------------------------
# W_1 representative for the Vallee Poussin chain


def fejer_factor(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``1 - |k|/(N+1)`` of the normalised 1-D Fejer density, ``|k| <= N``."""
    k = np.arange(-N, N + 1)
    return k, 1.0 - np.abs(k) / (N + 1.0)


def w1_representative(r: Sequence[float], alpha, N: int) -> SeparableSum:
    """``F_r * K_N`` with ``K_N`` the tensor Fejer density (non-negative, ``||K_N||_1 = 1``).

    A rank-1 separable function in ``W^r_{1,alpha}``; frequency 0 is removed per
    axis by the Bernoulli multiplier, so the result is zero-mean.
    """
    from hypcross.trigpoly import ArrayFactor

    d = len(r)
    alpha = (float(alpha),) * d if np.isscalar(alpha) else tuple(float(a) for a in alpha)
    m = MultiplierSpec("bernoulli", (tuple(r), alpha), d)
    k, c = fejer_factor(int(N))
    factors = tuple(ArrayFactor(k, c * m.weights_1d(j, k)) for j in range(d))
    return SeparableSum(d, [TensorTerm(1.0 + 0j, factors)])
