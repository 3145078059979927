"""Cross approximation errors.

``EE`` denotes the error of the step-hyperbolic Fourier sum ``||f - S_Q f||_X``
and ``E`` the best approximation ``inf_{t in T(Q)} ||f - t||_X``. In the
delta-block ``B_{q,1}`` norm the two coincide: blocks inside ``Q`` are matched
exactly by ``t = S_Q f`` and blocks outside cannot be reached by any ``t``.
Elsewhere ``E`` is bracketed by an upper bound from an explicit approximant
and a duality lower bound.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import weakref
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from hypcross.index import (
    CrossSpec,
    SmoothnessProfile,
    block_of_array,
    cross_cardinality,
    neighbours,
)
from hypcross.kernels import a_weight_1d
from hypcross.norms import NormSpec, block_norms, bq1_norm, lp_norm, norm
from hypcross.trigpoly import (
    ArrayFactor,
    Poly,
    QuadratureGrid,
    SeparableSum,
    SparseTrigPoly,
    TensorBlockPoly,
    TensorTerm,
    cross_remainder,
)

CSV_FIELDS = ("n", "cardinality", "value_EE", "value_E_upper", "value_E_lower", "space", "cross_variant", "seed")


@dataclass(frozen=True)
class ErrorReport:
    n: int
    cardinality: int
    value_EE: float
    value_E_upper: float
    value_E_lower: float
    space: NormSpec
    cross: CrossSpec
    cross_variant: str = "gamma"
    seed: int = 0

    def row(self) -> dict[str, str]:
        return {
            "n": str(self.n),
            "cardinality": str(self.cardinality),
            "value_EE": _fmt(self.value_EE),
            "value_E_upper": _fmt(self.value_E_upper),
            "value_E_lower": _fmt(self.value_E_lower),
            "space": self.space.label,
            "cross_variant": self.cross_variant,
            "seed": str(self.seed),
        }


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _is_rank1(f: Poly) -> bool:
    return isinstance(f, SeparableSum) and not isinstance(f, TensorBlockPoly) and f.rank == 1


# ---------------------------------------------------------------------------
# Fourier-sum and best errors


def fourier_tail_error(f: Poly, cross: CrossSpec, space: NormSpec, oversample: float | None = None) -> float:
    """``||f - S_Q f||_X`` for the target space ``X``.

    In the delta ``B_{q,1}`` norm this is the sum of ``||delta_s f||_q`` over
    the blocks with ``(s, w) >= n``.
    """
    if _is_rank1(f):
        return _rank1_tail_error(f, cross, space, oversample)
    return space.evaluate(cross_remainder(f, cross), oversample)


def best_error_block(f: Poly, cross: CrossSpec, space: NormSpec, oversample: float | None = None) -> float:
    """Exact ``E_Q(f)`` in the delta ``B_{q,1}`` norm.

    Any ``t`` with spectrum in ``Q`` changes only the blocks inside ``Q``, where
    ``t = S_Q f`` zeroes them; the outside blocks are fixed. The minimum is the
    sum of the outside block norms.
    """
    if not (space.kind == "bq1" and space.block_mode == "delta"):
        raise ValueError("exact best approximation is only available in the delta B_{q,1} norm")
    if _is_rank1(f):
        return _rank1_tail_error(f, cross, space, oversample)
    bn = block_norms(f, space.p, "delta", oversample)
    out = [bn[s] for s in sorted(bn) if not cross.contains_block(s)]
    return float(math.fsum(out))


def lq_error(f: Poly, cross: CrossSpec, q: float, grid: QuadratureGrid | None = None,
             oversample: float | None = None) -> float:
    """``||f - S_Q f||_q``; Parseval at ``q = 2`` unless a grid is given."""
    h = cross_remainder(f, cross)
    if grid is not None:
        return lp_norm(h, q, grid)
    return norm(h, q, oversample)


def remainder_moments(f: Poly, cross: CrossSpec) -> tuple[float, float]:
    """``(||h||_2, sum |h^(k)|)`` for ``h = f - S_Q f``.

    The second value bounds ``||h||_inf``; for a general separable sum it is
    the (larger) triangle-inequality bound over terms.
    """
    if _is_rank1(f):
        st = _rank1_state(f)
        l2sq = abs1 = 0.0
        for s in st.all_blocks():
            if not cross.contains_block(s):
                l2sq += st.block_moment(s, 2)
                abs1 += st.block_moment(s, 1)
        return math.sqrt(l2sq), abs1
    h = cross_remainder(f, cross)
    if isinstance(h, SeparableSum):
        if isinstance(h, TensorBlockPoly):
            l2 = h.l2()
        else:
            l2 = h.to_sparse().l2()
        a = sum(abs(t.weight) * math.prod(float(np.abs(x.coefficients()[1]).sum()) for x in t.factors) for t in h.terms)
        return l2, float(a)
    return h.l2(), float(np.abs(h.vals).sum())


def duality_lower_bound(f: Poly, cross: CrossSpec, q: float) -> float:
    """Certified lower bound on ``inf_{t in T(Q)} ||f - t||_q`` (hence also in ``B_{q,1}``).

    For ``q >= 2`` the ``L_2`` tail (Parseval) bounds every such error from
    below. For ``1 <= q < 2``, pairing with ``h = f - S_Q f`` gives
    ``||h||_2^2 / ||h||_inf`` with ``||h||_inf <= sum |h^(k)|``.
    """
    l2, a = remainder_moments(f, cross)
    if l2 == 0.0:
        return 0.0
    if q >= 2:
        return l2
    return l2 * l2 / a


# ---------------------------------------------------------------------------
# de la Vallee Poussin approximant


def _a_weight_vec(s: np.ndarray, k: np.ndarray) -> np.ndarray:
    """1-D ``A_s`` factor with array-valued ``s`` (entries < 1 give 0)."""
    s = np.asarray(s, dtype=np.int64)
    ak = np.abs(np.asarray(k, dtype=np.int64)).astype(np.float64)
    ok = s >= 1
    ss = np.maximum(s, 1)
    up = np.clip(2.0 - ak / np.ldexp(1.0, ss), 0.0, 1.0)
    lo = np.where(ss >= 2, np.clip(2.0 - ak / np.ldexp(1.0, ss - 1), 0.0, 1.0), (ak == 0).astype(np.float64))
    return np.where(ok, up - lo, 0.0)


def vp_head_level(n: float, profile: SmoothnessProfile) -> float:
    """Level ``n - gamma'(d)`` of the head blocks summed by :func:`vp_approximant`."""
    return n - sum(profile.gamma_prime)


def vp_approximant(f: SparseTrigPoly, n: float, profile: SmoothnessProfile) -> SparseTrigPoly:
    """``t_n = sum over (s, gamma') < n - gamma'(d) of A_s(f)``.

    Raises
    ------
    ValueError
        If ``n <= 3 gamma'(d)``, or if ``f`` is not zero-mean.
    AssertionError
        If the result leaves the cross ``Q^{gamma'}_n`` (checked, not assumed).
    """
    gp = np.asarray(profile.gamma_prime)
    gd = float(gp.sum())
    if n <= 3 * gd:
        raise ValueError(f"level n={n} must exceed 3 * gamma'(d) = {3 * gd}")
    if not isinstance(f, SparseTrigPoly):
        f = f.to_sparse()
    if len(f) == 0:
        return f
    if not f.zero_mean:
        raise ValueError("the approximant needs a zero-mean polynomial")
    head = n - gd
    bk = f.block_keys
    w = np.zeros(len(f))
    for e in itertools.product((0, 1), repeat=f.d):
        s = bk - np.asarray(e)
        valid = np.all(s >= 1, axis=1) & (s.astype(np.float64) @ gp < head)
        if not valid.any():
            continue
        term = np.ones(len(f))
        for j in range(f.d):
            term *= _a_weight_vec(s[:, j], f.keys[:, j])
        w += np.where(valid, term, 0.0)
    t = f.with_values(f.vals * w)
    if len(t):
        out = block_of_array(t.keys).astype(np.float64) @ gp >= n
        assert not out.any(), "vp approximant left the cross"
    return t


def vp_tail_error_b11(f: Poly, n: float, profile: SmoothnessProfile, oversample: float | None = None) -> float:
    """``||f - t_n||_{B_{1,1}}`` with ``A_s`` blocks.

    Rank-1 separable ``f`` is handled block by block without densifying:
    ``A_{s'}(f - t_n)`` only involves the neighbours of ``s'`` outside the head.
    """
    gd = sum(profile.gamma_prime)
    if n <= 3 * gd:
        raise ValueError(f"level n={n} must exceed 3 * gamma'(d) = {3 * gd}")
    if _is_rank1(f):
        head = CrossSpec(n - gd, profile.gamma_prime)
        return _rank1_state(f).a_mode_error(1.0, "vp", head, oversample)
    if not isinstance(f, SparseTrigPoly):
        f = f.to_sparse()
    t = vp_approximant(f, n, profile)
    return bq1_norm(f - t, 1.0, "a_kernel", oversample)


# ---------------------------------------------------------------------------
# rank-1 separable fast path


_RANK1_STATE: "weakref.WeakKeyDictionary[SeparableSum, _Rank1]" = weakref.WeakKeyDictionary()


def _rank1_state(f: SeparableSum) -> "_Rank1":
    """Shared per-function cache, so sweeps over ``n`` reuse the 1-D norms."""
    st = _RANK1_STATE.get(f)
    if st is None:
        st = _RANK1_STATE[f] = _Rank1(f)
    return st


class _Rank1:
    """Per-axis caches for a rank-1 function ``w * prod_j u_j(x_j)``."""

    def __init__(self, f: SeparableSum):
        t = f.terms[0]
        self.d = f.d
        self.weight = t.weight
        self.k = []
        self.c = []
        for fac in t.factors:
            k, c = fac.coefficients()
            self.k.append(np.asarray(k))
            self.c.append(np.asarray(c))
        self.maxbit = [int(np.abs(k).max()).bit_length() if len(k) else 0 for k in self.k]
        # row indices of each axis grouped by dyadic interval (0 holds k = 0)
        self._rows: list[dict[int, np.ndarray]] = []
        for k in self.k:
            kb = block_of_array(k[:, None])[:, 0]
            order = np.argsort(kb, kind="stable")
            bounds = np.searchsorted(kb[order], np.arange(0, int(kb.max(initial=0)) + 2))
            self._rows.append({b: order[bounds[b]:bounds[b + 1]] for b in range(len(bounds) - 1)})
        self._cache: dict = {}

    def all_blocks(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(1, m + 1) for m in self.maxbit))

    def block_moment(self, s, power: int) -> float:
        """``sum_{k in rho(s)} |f^(k)|^power``."""
        out = abs(self.weight) ** power
        for j, sj in enumerate(s):
            key = ("mom", j, sj, power)
            if key not in self._cache:
                self._cache[key] = float(np.sum(np.abs(self.c[j][self._block_rows(j, (sj,))]) ** power))
            out *= self._cache[key]
        return out

    def _block_rows(self, j: int, blocks: Sequence[int]) -> np.ndarray:
        parts = [self._rows[j][b] for b in blocks if b in self._rows[j]]
        if not parts:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(parts))

    def factor(self, j: int, spec: tuple) -> ArrayFactor | None:
        """1-D factor ``u_j`` times a product of multipliers described by ``spec``.

        ``spec`` entries: ``("a", s)`` for the ``A_s`` factor, ``("b", b)``
        for the indicator of the dyadic interval ``b``.
        """
        key = ("fac", j, spec)
        if key in self._cache:
            return self._cache[key]
        allowed = None
        for kind, v in spec:
            blocks = {v, v + 1} if kind == "a" else {v}
            allowed = blocks if allowed is None else allowed & blocks
        rows = self._block_rows(j, sorted(allowed))
        k, c = self.k[j][rows], self.c[j][rows]
        m = np.ones(len(k))
        for kind, v in spec:
            if kind == "a":
                m = m * a_weight_1d(v, k)
        nz = m != 0
        fac = ArrayFactor(k[nz], c[nz] * m[nz]) if nz.any() else None
        self._cache[key] = fac
        return fac

    def factor_norm(self, j: int, spec: tuple, q: float, oversample: float | None) -> float:
        key = ("norm", j, spec, q, oversample)
        if key not in self._cache:
            fac = self.factor(j, spec)
            self._cache[key] = 0.0 if fac is None else fac.norm(q, oversample)
        return self._cache[key]

    def piece_norm(self, specs: list[tuple[tuple, ...]], q: float, oversample: float | None) -> float:
        """``|| sum_i prod_j (spec_ij applied to u_j) ||_q``."""
        if len(specs) == 1:
            return abs(self.weight) * math.prod(self.factor_norm(j, sp, q, oversample) for j, sp in enumerate(specs[0]))
        terms, live = [], []
        for spec in specs:
            facs = [self.factor(j, sp) for j, sp in enumerate(spec)]
            if all(x is not None for x in facs):
                terms.append(TensorTerm(self.weight, tuple(facs)))
                live.append(spec)
        if not terms:
            return 0.0
        if len(terms) == 1:
            return self.piece_norm(live, q, oversample)
        return lp_norm(SeparableSum(self.d, terms), q, oversample=oversample)

    def a_mode_error(self, q: float, which: str, cross: CrossSpec, oversample: float | None) -> float:
        """``sum_{s'} ||A_{s'}(f - P f)||_q`` where ``P`` is ``S_Q`` (``"fourier"``) or ``t_n`` (``"vp"``).

        For ``"vp"``, ``cross`` is the head set ``(s, gamma') < n - gamma'(d)``.
        """
        total = []
        for sp in self.all_blocks():
            if which == "vp":
                near = list(neighbours(sp))
                out = [s for s in near if not cross.contains_block(s)]
                if not out:
                    continue
                if len(out) == len(near):
                    specs = [tuple((("a", sp[j]),) for j in range(self.d))]
                else:
                    specs = [tuple((("a", sp[j]), ("a", s[j])) for j in range(self.d)) for s in out]
            else:
                near = [tuple(v + e for v, e in zip(sp, eps)) for eps in itertools.product((0, 1), repeat=self.d)]
                out = [b for b in near if not cross.contains_block(b)]
                if not out:
                    continue
                if len(out) == len(near):
                    specs = [tuple((("a", sp[j]),) for j in range(self.d))]
                else:
                    specs = [tuple((("a", sp[j]), ("b", b[j])) for j in range(self.d)) for b in out]
            v = self.piece_norm(specs, q, oversample)
            if v > 0:
                total.append(v)
        return float(math.fsum(total))

    def delta_error(self, q: float, cross: CrossSpec, oversample: float | None) -> float:
        vals = [
            self.piece_norm([tuple((("b", s[j]),) for j in range(self.d))], q, oversample)
            for s in self.all_blocks()
            if not cross.contains_block(s)
        ]
        return float(math.fsum(vals))


def _rank1_tail_error(f: SeparableSum, cross: CrossSpec, space: NormSpec, oversample: float | None) -> float:
    st = _rank1_state(f)
    if space.kind == "bq1" and space.block_mode == "a_kernel":
        return st.a_mode_error(space.p, "fourier", cross, oversample)
    if space.kind == "bq1":
        return st.delta_error(space.p, cross, oversample)
    if space.kind == "lp" and space.p == 2 and oversample is None:
        return remainder_moments(f, cross)[0]
    raise ValueError(f"space {space.label} is not supported for rank-1 separable input; densify first")


# ---------------------------------------------------------------------------
# sweeps


def error_report(f: Poly, n: int, cross: CrossSpec, space: NormSpec, *, profile: SmoothnessProfile | None = None,
                 cross_variant: str = "gamma", seed: int = 0, oversample: float | None = None) -> ErrorReport:
    """Compute ``EE`` and the bracket ``[E_lower, E_upper]`` at one level."""
    ee = fourier_tail_error(f, cross, space, oversample)
    if space.kind == "bq1" and space.block_mode == "delta":
        upper = lower = ee
    else:
        upper = ee
        if space.kind == "lp" and space.p == 2 and oversample is None:
            lower = ee
        else:
            lower = duality_lower_bound(f, cross, space.p)
        if (space.kind == "bq1" and space.block_mode == "a_kernel" and space.p == 1 and profile is not None
                and cross_variant == "gamma_prime" and n > 3 * sum(profile.gamma_prime)):
            upper = min(upper, vp_tail_error_b11(f, n, profile, oversample))
    return ErrorReport(n, cross_cardinality(cross), ee, upper, lower, space, cross, cross_variant, seed)


def error_sweep(make_f: Callable[[int], Poly], n_values: Sequence[int], profile: SmoothnessProfile,
                cross_variant: str, space: NormSpec, seed: int = 0,
                oversample: float | None = None) -> list[ErrorReport]:
    """One :class:`ErrorReport` per level, in the order of ``n_values``."""
    out = []
    for n in n_values:
        f = make_f(int(n))
        cross = CrossSpec.from_profile(int(n), profile, cross_variant)
        out.append(error_report(f, int(n), cross, space, profile=profile, cross_variant=cross_variant,
                                seed=seed, oversample=oversample))
    return out


def reports_to_csv(reports: Sequence[ErrorReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def read_sweep_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
