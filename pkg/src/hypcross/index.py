"""Multi-indices, dyadic blocks and step-hyperbolic crosses.

A dyadic block ``rho(s)`` collects the frequencies ``k`` with
``2**(s_j - 1) <= |k_j| < 2**s_j`` in every coordinate. A step-hyperbolic
cross of level ``n`` with weight vector ``w`` is the union of the blocks with
``(s, w) < n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

BlockIndex = tuple[int, ...]
FreqIndex = tuple[int, ...]


def block_of(k: Sequence[int]) -> BlockIndex:
    """Return the dyadic block containing the frequency ``k``.

    Raises
    ------
    ValueError
        If some coordinate of ``k`` is zero; frequency 0 lies in no block.
    """
    k = tuple(int(v) for v in k)
    if len(k) == 0:
        raise ValueError("frequency must have at least one coordinate")
    if any(v == 0 for v in k):
        raise ValueError(f"frequency {k} has a zero coordinate; no dyadic block contains it")
    return tuple(abs(v).bit_length() for v in k)


def block_of_array(keys: np.ndarray) -> np.ndarray:
    """Vectorised :func:`block_of` for an ``(N, d)`` integer array.

    Rows with a zero coordinate get block index 0 in that coordinate.
    """
    a = np.abs(np.asarray(keys, dtype=np.int64))
    out = np.zeros_like(a)
    nz = a > 0
    # floor(log2(a)) + 1 == bit_length, exact for |k| < 2**52
    out[nz] = np.floor(np.log2(a[nz].astype(np.float64))).astype(np.int64) + 1
    # guard against log2 rounding at exact powers of two
    lo = np.left_shift(np.int64(1), np.maximum(out - 1, 0))
    out[nz & (a < lo)] -= 1
    hi = np.left_shift(np.int64(1), out)
    out[nz & (a >= hi)] += 1
    return out


def interval_1d(s: int) -> np.ndarray:
    """Sorted integers ``k`` with ``2**(s-1) <= |k| < 2**s``."""
    if s < 1:
        raise ValueError("block index must be >= 1")
    pos = np.arange(1 << (s - 1), 1 << s, dtype=np.int64)
    return np.concatenate([-pos[::-1], pos])


def rho_block(s: Sequence[int]) -> np.ndarray:
    """All frequencies of the dyadic block ``rho(s)`` as an ``(N, d)`` array.

    Rows are in lexicographic order and ``N == 2**sum(s)``.
    """
    s = tuple(int(v) for v in s)
    if any(v < 1 for v in s):
        raise ValueError(f"block index {s} must have all entries >= 1")
    axes = [interval_1d(v) for v in s]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def block_size(s: Sequence[int]) -> int:
    return 1 << int(sum(s))


def blocks_in_band(weights: Sequence[float], lo: float, hi: float) -> list[BlockIndex]:
    """Blocks ``s`` (entries >= 1) with ``lo <= (s, weights) < hi``, lexicographic.

    The comparison is done in double precision; ties at ``hi`` are excluded.
    """
    w = [float(v) for v in weights]
    if any(v <= 0 for v in w):
        raise ValueError("weights must be positive")
    d = len(w)
    # (s, w) >= sum(w) for every valid s; remaining budget bounds the next entry
    tail_min = [sum(w[j:]) for j in range(d)] + [0.0]
    out: list[BlockIndex] = []

    def rec(j: int, prefix: list[int], acc: float) -> None:
        if j == d:
            if lo <= acc < hi:
                out.append(tuple(prefix))
            return
        sj = 1
        while acc + sj * w[j] + tail_min[j + 1] < hi:
            prefix.append(sj)
            rec(j + 1, prefix, acc + sj * w[j])
            prefix.pop()
            sj += 1

    rec(0, [], 0.0)
    return out


def dot(s: Sequence[float], w: Sequence[float]) -> float:
    return float(sum(float(a) * float(b) for a, b in zip(s, w)))


@dataclass(frozen=True)
class SmoothnessProfile:
    """Smoothness vector ``r`` sorted ascending, with derived ``nu``, ``gamma``, ``gamma_prime``."""

    r: tuple[float, ...]
    nu: int
    gamma: tuple[float, ...]
    gamma_prime: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.r)

    @property
    def r1(self) -> float:
        return self.r[0]


def midpoint_rule(gamma_j: float) -> float:
    return 0.5 * (1.0 + gamma_j)


def make_profile(
    r: Sequence[float],
    gamma_prime_rule: Callable[[float], float] | Sequence[float] | None = None,
) -> SmoothnessProfile:
    """Build a :class:`SmoothnessProfile` from a smoothness vector.

    ``r`` is sorted ascending. ``gamma_prime_rule`` is either a callable
    mapping ``gamma_j`` to ``gamma'_j`` for the non-minimal coordinates
    (default: midpoint ``(1 + gamma_j) / 2``), or an explicit full vector.
    """
    rr = tuple(sorted(float(v) for v in r))
    if len(rr) == 0:
        raise ValueError("smoothness vector must be non-empty")
    if any(not math.isfinite(v) or v <= 0 for v in rr):
        raise ValueError(f"smoothness orders must be positive, got {tuple(r)}")
    r1 = rr[0]
    nu = sum(1 for v in rr if v == r1)
    gamma = tuple(v / r1 for v in rr)
    if gamma_prime_rule is None:
        gamma_prime_rule = midpoint_rule
    if callable(gamma_prime_rule):
        gp = tuple(g if j < nu else float(gamma_prime_rule(g)) for j, g in enumerate(gamma))
    else:
        gp = tuple(float(v) for v in gamma_prime_rule)
        if len(gp) != len(rr):
            raise ValueError("gamma_prime vector has wrong length")
    for j, (g, g2) in enumerate(zip(gamma, gp)):
        if j < nu and g2 != g:
            raise ValueError("gamma_prime must equal gamma on the minimal coordinates")
        if j >= nu and not (1.0 < g2 < g):
            raise ValueError(f"gamma_prime[{j}]={g2} must lie strictly between 1 and gamma[{j}]={g}")
    return SmoothnessProfile(rr, nu, gamma, gp)


@dataclass(frozen=True)
class CrossSpec:
    """Step-hyperbolic cross ``Q_n^w``: union of ``rho(s)`` over ``(s, w) < n``."""

    n: float
    weights: tuple[float, ...]
    _blocks: tuple[BlockIndex, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.weights)
        if len(w) == 0:
            raise ValueError("cross needs at least one weight")
        if any(not math.isfinite(v) or v < 1.0 for v in w):
            raise ValueError(f"cross weights must be >= 1, got {w}")
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return len(self.weights)

    @classmethod
    def ones(cls, n: float, d: int) -> "CrossSpec":
        return cls(n, (1.0,) * d)

    @classmethod
    def from_profile(cls, n: float, profile: SmoothnessProfile, variant: str = "gamma") -> "CrossSpec":
        if variant == "gamma":
            return cls(n, profile.gamma)
        if variant == "gamma_prime":
            return cls(n, profile.gamma_prime)
        if variant == "ones":
            return cls.ones(n, profile.d)
        raise ValueError(f"unknown cross variant {variant!r}")

    def contains_block(self, s: Sequence[int]) -> bool:
        return dot(s, self.weights) < self.n


def cross_blocks(spec: CrossSpec) -> list[BlockIndex]:
    """Blocks of the cross in lexicographic order (empty when ``n <= sum(weights)``)."""
    return blocks_in_band(spec.weights, -math.inf, spec.n)


def cross_cardinality(spec: CrossSpec) -> int:
    return sum(block_size(s) for s in cross_blocks(spec))


def cross_frequencies(spec: CrossSpec) -> np.ndarray:
    blocks = cross_blocks(spec)
    if not blocks:
        return np.zeros((0, spec.d), dtype=np.int64)
    return np.concatenate([rho_block(s) for s in blocks])


def shell(n: int, d: int) -> list[BlockIndex]:
    """Blocks with ``||s||_1 == n``."""
    return blocks_in_band((1.0,) * d, n, n + 1)


def neighbours(s: Sequence[int]) -> Iterator[BlockIndex]:
    """Blocks ``s'`` with ``||s - s'||_inf <= 1`` and all entries >= 1."""
    for e in itertools.product((-1, 0, 1), repeat=len(s)):
        t = tuple(a + b for a, b in zip(s, e))
        if min(t) >= 1:
            yield t
