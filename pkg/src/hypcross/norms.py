"""``L_p``, ``B_{q,1}``, ``B^r_{p,theta}`` and ``H^r_p`` norms of trigonometric polynomials.

Every decomposition norm is computed in one declared block mode:

* ``"delta"`` -- blocks ``delta_s(f)`` (sharp dyadic restriction), meaningful for ``1 < p < inf``;
* ``"a_kernel"`` -- blocks ``A_s(f)`` from the de la Vallee Poussin system, valid for ``p >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hypcross.index import BlockIndex, dot
from hypcross.kernels import a_blocks_touching, a_weight_1d, as_weights
from hypcross.trigpoly import (
    ArrayFactor,
    Poly,
    QuadratureGrid,
    SeparableSum,
    SparseTrigPoly,
    TensorBlockPoly,
    TensorTerm,
    grid_for,
    separable_power_sum,
    synthesize,
)

MODES = ("delta", "a_kernel")


def _check_p(p: float) -> float:
    p = float(p)
    if not (1.0 <= p < math.inf):
        raise ValueError(f"exponent must satisfy 1 <= p < inf, got {p}")
    return p


def lp_norm(f: Poly, p: float, grid: QuadratureGrid | None = None, oversample: float | None = None) -> float:
    """Normalised ``L_p`` norm ``((2 pi)^-d int |f|^p)^(1/p)`` by the tensor rectangle rule.

    Exact for even integer ``p`` on the default grid; for ``p = 2`` it agrees
    with Parseval to roundoff.
    """
    p = _check_p(p)
    if f.is_zero:
        return 0.0
    if grid is None:
        grid = grid_for(f.max_freq, p, oversample)
    if isinstance(f, SeparableSum):
        if f.rank == 1:
            grid.check_covers(f.max_freq)
            t = f.terms[0]
            return abs(t.weight) * math.prod(
                _factor_norm_on(fac, p, m) for fac, m in zip(t.factors, grid.sizes)
            )
        return separable_power_sum(f, p, grid) ** (1.0 / p)
    v = synthesize(f, grid)
    return float(np.mean(np.abs(v) ** p) ** (1.0 / p))


def _factor_norm_on(fac, p: float, m: int) -> float:
    v = fac.samples(m)
    return float(np.mean(np.abs(v) ** p) ** (1.0 / p))


def lp_norm_tensor(term: TensorTerm, p: float, oversample: float | None = None) -> float:
    """Norm of a rank-1 term as the product of its 1-D quadrature norms."""
    p = _check_p(p)
    return abs(term.weight) * math.prod(f.norm(p, oversample) for f in term.factors)


def norm(f: Poly, p: float, oversample: float | None = None) -> float:
    """``L_p`` norm using Parseval at ``p = 2`` and quadrature otherwise."""
    p = _check_p(p)
    if p == 2 and oversample is None:
        if isinstance(f, (SparseTrigPoly, TensorBlockPoly)):
            return f.l2()
        return f.to_sparse().l2()
    if isinstance(f, TensorBlockPoly) and f.rank == 1:
        return lp_norm_tensor(f.terms[0], p, oversample)
    return lp_norm(f, p, oversample=oversample)


# ---------------------------------------------------------------------------
# block decompositions


def block_norms(f: Poly, p: float, mode: str = "delta", oversample: float | None = None) -> dict[BlockIndex, float]:
    """``{s: ||delta_s(f)||_p}`` or ``{s: ||A_s(f)||_p}`` over the blocks where the piece is non-zero.

    Keys are sorted lexicographically.
    """
    p = _check_p(p)
    if mode not in MODES:
        raise ValueError(f"unknown block mode {mode!r}")
    if f.is_zero:
        return {}
    if mode == "delta":
        if isinstance(f, TensorBlockPoly):
            return {t.block: lp_norm_tensor(t, p, oversample) for t in f.terms}
        sp = f.to_sparse()
        out = {}
        for s, idx in sp.blocks().items():
            out[s] = norm(sp.select(idx), p, oversample)
        return out
    if isinstance(f, SeparableSum):
        return _a_block_norms_separable(f, p, oversample)
    return _a_block_norms_sparse(f, p, oversample)


def _a_block_norms_sparse(f: SparseTrigPoly, p: float, oversample: float | None) -> dict[BlockIndex, float]:
    if not f.zero_mean:
        raise ValueError("A_s decomposition needs a zero-mean polynomial")
    bk = f.block_keys
    cands: set[BlockIndex] = set()
    for b in f.blocks():
        cands.update(a_blocks_touching(b))
    out = {}
    for s in sorted(cands):
        sv = np.asarray(s)
        rows = np.all((bk == sv) | (bk == sv + 1), axis=1)
        sub = f.select(rows)
        piece = sub.with_values(sub.vals * as_weights(s, sub.keys))
        if not piece.is_zero:
            out[s] = norm(piece, p, oversample)
    return out


def a_piece_separable(f: SeparableSum, s: Sequence[int]) -> SeparableSum:
    """``A_s(f)`` for a separable ``f``, dropping terms that vanish."""
    terms = []
    for t in f.terms:
        facs = []
        for j, fac in enumerate(t.factors):
            k, c = fac.coefficients()
            w = a_weight_1d(s[j], k)
            nz = w != 0
            if not nz.any():
                break
            facs.append(ArrayFactor(k[nz], c[nz] * w[nz]))
        else:
            if all(len(x.k) for x in facs):
                terms.append(TensorTerm(t.weight, tuple(facs)))
    return SeparableSum(f.d, terms)


def _factor_a_range(fac) -> list[int]:
    k = np.abs(fac.coefficients()[0])
    k = k[k > 0]
    if len(k) == 0:
        return []
    lo = max(1, int(k.min()).bit_length() - 1)
    hi = int(k.max()).bit_length()
    return list(range(lo, hi + 1))


def _a_block_norms_separable(f: SeparableSum, p: float, oversample: float | None) -> dict[BlockIndex, float]:
    import itertools

    if not f.zero_mean:
        raise ValueError("A_s decomposition needs a zero-mean polynomial")
    per_dim = [sorted(set().union(*(_factor_a_range(t.factors[j]) for t in f.terms))) for j in range(f.d)]
    out = {}
    for s in itertools.product(*per_dim):
        piece = a_piece_separable(f, s)
        if not piece.is_zero:
            v = norm(piece, p, oversample) if piece.rank > 1 else lp_norm_tensor(piece.terms[0], p, oversample)
            if v > 0:
                out[tuple(s)] = v
    return out


def bq1_norm(f: Poly, q: float, mode: str = "delta", oversample: float | None = None) -> float:
    """``||f||_{B_{q,1}} = sum_s ||piece_s(f)||_q`` summed in sorted block order.

    Raises
    ------
    ValueError
        For ``mode="delta"`` with ``q = 1``; the sharp-block form is only
        equivalent to the ``A_s`` norm for ``1 < q < inf``.
    """
    q = _check_p(q)
    if mode == "delta" and q == 1:
        raise ValueError("delta-mode B_{q,1} norm requires q > 1")
    bn = block_norms(f, q, mode, oversample)
    return float(math.fsum(bn[s] for s in sorted(bn)))


def besov_norm(f: Poly, r: Sequence[float], p: float, theta: float, mode: str = "delta",
               oversample: float | None = None) -> float:
    """Decomposition norm ``(sum_s (2^{(s,r)} ||piece_s(f)||_p)^theta)^(1/theta)``; ``theta=inf`` gives the sup."""
    p = _check_p(p)
    if mode == "delta" and p == 1:
        raise ValueError("delta-mode Besov norm requires 1 < p < inf; use mode='a_kernel' for p = 1")
    theta = float(theta)
    if theta < 1:
        raise ValueError("theta must be >= 1")
    if len(r) != f.d:
        raise ValueError("smoothness vector has wrong length")
    bn = block_norms(f, p, mode, oversample)
    if not bn:
        return 0.0
    vals = np.array([2.0 ** dot(s, r) * bn[s] for s in sorted(bn)])
    if math.isinf(theta):
        return float(vals.max())
    m = vals.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((vals / m) ** theta) ** (1.0 / theta))


def h_norm(f: Poly, r: Sequence[float], p: float, mode: str = "delta", oversample: float | None = None) -> float:
    """``sup_s 2^{(s,r)} ||piece_s(f)||_p``."""
    return besov_norm(f, r, p, math.inf, mode, oversample)


# ---------------------------------------------------------------------------
# declared spaces


@dataclass(frozen=True)
class NormSpec:
    """A target space: ``kind`` in ``lp | bq1 | besov | h_sup``."""

    kind: str
    p: float
    theta: float = 1.0
    r: tuple[float, ...] | None = None
    block_mode: str = "delta"

    def __post_init__(self) -> None:
        if self.kind not in ("lp", "bq1", "besov", "h_sup"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        _check_p(self.p)
        if self.block_mode not in MODES:
            raise ValueError(f"unknown block mode {self.block_mode!r}")
        if self.kind in ("besov", "h_sup") and self.r is None:
            raise ValueError(f"{self.kind} norm needs a smoothness vector")
        if self.kind == "bq1" and self.block_mode == "delta" and self.p == 1:
            raise ValueError("bq1 in delta mode requires q > 1")

    @classmethod
    def parse(cls, text: str) -> "NormSpec":
        """Parse ``lq:<q>``, ``bq1:<q>`` (delta blocks) or ``bq1a:<q>`` (A_s blocks)."""
        try:
            name, val = text.split(":", 1)
            q = float(val)
        except ValueError:
            raise ValueError(f"bad space spec {text!r}; expected e.g. 'lq:4', 'bq1:4' or 'bq1a:1'") from None
        if name in ("lq", "lp"):
            return cls("lp", q)
        if name == "bq1":
            return cls("bq1", q, block_mode="delta")
        if name == "bq1a":
            return cls("bq1", q, block_mode="a_kernel")
        raise ValueError(f"unknown space {name!r} in {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "lp":
            return f"lq:{self.p:g}"
        if self.kind == "bq1":
            return f"{'bq1' if self.block_mode == 'delta' else 'bq1a'}:{self.p:g}"
        return f"{self.kind}:{self.p:g}"

    def evaluate(self, f: Poly, oversample: float | None = None) -> float:
        if self.kind == "lp":
            return norm(f, self.p, oversample)
        if self.kind == "bq1":
            return bq1_norm(f, self.p, self.block_mode, oversample)
        theta = math.inf if self.kind == "h_sup" else self.theta
        return besov_norm(f, self.r, self.p, theta, self.block_mode, oversample)
