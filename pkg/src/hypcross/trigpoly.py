"""Trigonometric polynomials on the torus ``T^d``.

Coefficients use the normalised pairing ``f_hat(k) = (2 pi)^-d int f e^{-i(k,x)} dx``,
so ``||e^{i(k,.)}||_2 == 1`` and convolution ``(2 pi)^-d int f(y) g(x - y) dy``
is the coefficient-wise product.

Two representations are provided:

* :class:`SparseTrigPoly` -- an explicit finite map ``k -> f_hat(k)``.
* :class:`SeparableSum` / :class:`TensorBlockPoly` -- sums of rank-1 terms
  ``w * prod_j u_j(x_j)`` whose norms factorise or reduce to low-rank grid
  evaluation. This is the only way to reach levels where the dense grid would
  not fit in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from hypcross.index import (
    BlockIndex,
    CrossSpec,
    block_of_array,
    interval_1d,
)

DROP_BELOW = 1e-300
DENSE_GRID_LIMIT = 1 << 26


class GridError(ValueError):
    """Quadrature grid does not cover the bandwidth or exceeds the memory budget."""


def _next_pow2(x: float) -> int:
    m = 1
    while m < x:
        m <<= 1
    return m


# ---------------------------------------------------------------------------
# quadrature grid


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor rectangle-rule grid with ``sizes[j]`` points ``2 pi m / sizes[j]`` per axis."""

    sizes: tuple[int, ...]
    oversample: float = 8.0

    def __post_init__(self) -> None:
        sizes = tuple(int(m) for m in self.sizes)
        for m in sizes:
            if m < 1 or m & (m - 1):
                raise GridError(f"grid sizes must be powers of two, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def d(self) -> int:
        return len(self.sizes)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes, dtype=np.int64))

    @classmethod
    def for_bandwidth(cls, max_freq: Sequence[int], oversample: float = 8.0) -> "QuadratureGrid":
        """Smallest power-of-two grid with ``M_j >= oversample * (2 K_j + 1)``."""
        if oversample < 1:
            raise GridError("oversampling factor must be >= 1")
        return cls(tuple(_next_pow2(oversample * (2 * int(k) + 1)) for k in max_freq), float(oversample))

    def check_covers(self, max_freq: Sequence[int]) -> None:
        if len(max_freq) != self.d:
            raise GridError(f"grid dimension {self.d} != polynomial dimension {len(max_freq)}")
        for m, k in zip(self.sizes, max_freq):
            if m < 2 * int(k) + 1:
                raise GridError(f"grid size {m} too small for frequency {k} (needs >= {2 * int(k) + 1})")


def default_oversample(p: float) -> float:
    """Oversampling used when none is given.

    For even integer ``p`` the rectangle rule is exact once ``M > p K``, which
    ``p / 2`` guarantees; otherwise fall back to 8.
    """
    if float(p).is_integer() and int(p) % 2 == 0:
        return max(1.0, p / 2)
    return 8.0


def grid_for(max_freq: Sequence[int], p: float, oversample: float | None = None) -> QuadratureGrid:
    return QuadratureGrid.for_bandwidth(max_freq, default_oversample(p) if oversample is None else oversample)


# ---------------------------------------------------------------------------
# sparse representation


def _canonical(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort lexicographically, merge duplicate keys by summation, drop negligible entries."""
    if len(vals) == 0:
        return keys.reshape(0, keys.shape[1]), vals
    order = np.lexsort(keys.T[::-1])
    keys = keys[order]
    vals = vals[order]
    if len(vals) > 1:
        new = np.empty(len(vals), dtype=bool)
        new[0] = True
        new[1:] = np.any(keys[1:] != keys[:-1], axis=1)
        if not new.all():
            starts = np.flatnonzero(new)
            vals = np.add.reduceat(vals, starts)
            keys = keys[starts]
    keep = np.abs(vals) >= DROP_BELOW
    return keys[keep], vals[keep]


class SparseTrigPoly:
    """Finite map from frequencies ``k in Z^d`` to complex amplitudes.

    Stored as a lexicographically sorted ``(N, d)`` integer array ``keys`` and a
    matching complex array ``vals``. Instances are immutable.
    """

    def __init__(self, d: int, keys=None, vals=None, *, _trusted: bool = False):
        d = int(d)
        if d < 1:
            raise ValueError("dimension must be >= 1")
        if keys is None:
            keys = np.zeros((0, d), dtype=np.int64)
            vals = np.zeros(0, dtype=np.complex128)
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, d)
        vals = np.asarray(vals, dtype=np.complex128).reshape(-1)
        if len(keys) != len(vals):
            raise ValueError("keys and vals differ in length")
        if not _trusted:
            keys, vals = _canonical(keys, vals)
        keys.flags.writeable = False
        vals.flags.writeable = False
        self.d = d
        self.keys = keys
        self.vals = vals

    # construction ---------------------------------------------------------
    @classmethod
    def from_dict(cls, d: int, coeffs: Mapping[Sequence[int], complex]) -> "SparseTrigPoly":
        if not coeffs:
            return cls(d)
        keys = np.array([tuple(k) for k in coeffs], dtype=np.int64).reshape(-1, d)
        vals = np.array(list(coeffs.values()), dtype=np.complex128)
        return cls(d, keys, vals)

    @classmethod
    def zero(cls, d: int) -> "SparseTrigPoly":
        return cls(d)

    @classmethod
    def exponential(cls, k: Sequence[int], amplitude: complex = 1.0) -> "SparseTrigPoly":
        return cls(len(k), np.array([k]), np.array([amplitude]))

    # accessors ------------------------------------------------------------
    @property
    def coeffs(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.keys, self.vals)}

    def __len__(self) -> int:
        return len(self.vals)

    def __repr__(self) -> str:
        return f"SparseTrigPoly(d={self.d}, nnz={len(self)})"

    def coefficient(self, k: Sequence[int]) -> complex:
        k = np.asarray(k, dtype=np.int64)
        hit = np.flatnonzero(np.all(self.keys == k, axis=1))
        return complex(self.vals[hit[0]]) if len(hit) else 0j

    @property
    def is_zero(self) -> bool:
        return len(self) == 0

    @property
    def zero_mean(self) -> bool:
        """True when no supported frequency has a zero coordinate."""
        return bool(np.all(self.keys != 0))

    @property
    def max_freq(self) -> tuple[int, ...]:
        if len(self) == 0:
            return (0,) * self.d
        return tuple(int(v) for v in np.abs(self.keys).max(axis=0))

    def l2(self) -> float:
        """Parseval value ``(sum |f_hat(k)|^2)^(1/2)``."""
        return float(np.sqrt(np.sum(np.abs(self.vals) ** 2)))

    @cached_property
    def block_keys(self) -> np.ndarray:
        return block_of_array(self.keys)

    def blocks(self) -> dict[BlockIndex, np.ndarray]:
        """Map from each occupied dyadic block to the row indices of its coefficients.

        Requires ``zero_mean``.
        """
        if not self.zero_mean:
            raise ValueError("block decomposition needs a zero-mean polynomial (no k_j = 0)")
        groups: dict[BlockIndex, list[int]] = {}
        for i, s in enumerate(map(tuple, self.block_keys.tolist())):
            groups.setdefault(s, []).append(i)
        return {s: np.asarray(groups[s], dtype=np.int64) for s in sorted(groups)}

    def select(self, mask: np.ndarray) -> "SparseTrigPoly":
        return SparseTrigPoly(self.d, self.keys[mask], self.vals[mask], _trusted=True)

    def with_values(self, vals: np.ndarray) -> "SparseTrigPoly":
        """Same support, new amplitudes (re-canonicalised to drop zeros)."""
        vals = np.asarray(vals, dtype=np.complex128)
        keep = np.abs(vals) >= DROP_BELOW
        return SparseTrigPoly(self.d, self.keys[keep], vals[keep], _trusted=True)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "SparseTrigPoly") -> None:
        if not isinstance(other, SparseTrigPoly):
            raise TypeError(f"cannot combine SparseTrigPoly with {type(other).__name__}")
        if other.d != self.d:
            raise ValueError(f"dimension mismatch {self.d} != {other.d}")

    def __add__(self, other: "SparseTrigPoly") -> "SparseTrigPoly":
        self._check(other)
        return SparseTrigPoly(self.d, np.concatenate([self.keys, other.keys]), np.concatenate([self.vals, other.vals]))

    def __sub__(self, other: "SparseTrigPoly") -> "SparseTrigPoly":
        self._check(other)
        return SparseTrigPoly(self.d, np.concatenate([self.keys, other.keys]), np.concatenate([self.vals, -other.vals]))

    def __neg__(self) -> "SparseTrigPoly":
        return SparseTrigPoly(self.d, self.keys, -self.vals, _trusted=True)

    def __mul__(self, c: complex) -> "SparseTrigPoly":
        if isinstance(c, (SparseTrigPoly, SeparableSum)):
            return NotImplemented
        return self.with_values(self.vals * complex(c))

    __rmul__ = __mul__

    def allclose(self, other: "SparseTrigPoly", atol: float = 1e-12) -> bool:
        diff = self - other
        return bool(len(diff) == 0 or np.max(np.abs(diff.vals)) <= atol)

    def to_sparse(self) -> "SparseTrigPoly":
        return self


# ---------------------------------------------------------------------------
# 1-D factors


def _samples_from_coeffs(k: np.ndarray, c: np.ndarray, m: int) -> np.ndarray:
    if len(k) and 2 * int(np.max(np.abs(k))) + 1 > m:
        raise GridError(f"1-D grid of size {m} too small for frequency {int(np.max(np.abs(k)))}")
    buf = np.zeros(m, dtype=np.complex128)
    np.add.at(buf, np.mod(k, m), c)
    return np.fft.ifft(buf) * m


class Factor1D:
    """A one-dimensional trigonometric polynomial used as a tensor factor."""

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def max_freq(self) -> int:
        raise NotImplementedError

    @property
    def is_real(self) -> bool:
        """True when ``c(-k) == conj(c(k))``, i.e. the factor is a real function."""
        return False

    def samples(self, m: int) -> np.ndarray:
        k, c = self.coefficients()
        return _samples_from_coeffs(k, c, m)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients()[1]) ** 2)))

    def norm(self, p: float, oversample: float | None = None) -> float:
        return _factor_norm(self, float(p), oversample)

    def multiply(self, weights_fn) -> "ArrayFactor":
        k, c = self.coefficients()
        return ArrayFactor.from_pairs(k, c * weights_fn(k))


def _quad_norm_1d(f: Factor1D, p: float, oversample: float | None) -> float:
    if p == 2 and oversample is None:
        return f.l2()
    m = _next_pow2((default_oversample(p) if oversample is None else oversample) * (2 * f.max_freq + 1))
    v = f.samples(m)
    return float(np.mean(np.abs(v) ** p) ** (1.0 / p))


@lru_cache(maxsize=4096)
def _cached_block_norm(f: "BlockFactor", p: float, oversample: float | None) -> float:
    return _quad_norm_1d(f, p, oversample)


def _factor_norm(f: Factor1D, p: float, oversample: float | None) -> float:
    if isinstance(f, BlockFactor):
        return _cached_block_norm(f, p, oversample)
    cache = f.__dict__.setdefault("_norms", {})
    key = (p, oversample)
    if key not in cache:
        cache[key] = _quad_norm_1d(f, p, oversample)
    return cache[key]


@dataclass(frozen=True)
class BlockFactor(Factor1D):
    """Factor ``sum_{2^{s-1} <= |k| < 2^s} |k|^power * exp(i sign(k) phase pi/2) e^{ikx}``.

    ``power=0, phase=0`` is the dyadic block of the Dirichlet kernel; negative
    ``power`` gives a block of the Bernoulli kernel.
    """

    s: int
    power: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if int(self.s) < 1:
            raise ValueError("block index must be >= 1")
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "power", float(self.power))
        object.__setattr__(self, "phase", float(self.phase))

    @property
    def max_freq(self) -> int:
        return (1 << self.s) - 1

    @property
    def is_real(self) -> bool:
        return True

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        k = interval_1d(self.s)
        return k, block_factor_values(k, self.power, self.phase)

    def l2(self) -> float:
        return _block_l2(self.s, self.power)

    def derivative(self, r: float, alpha: float) -> "BlockFactor":
        return BlockFactor(self.s, self.power + r, self.phase + alpha)


def block_factor_values(k: np.ndarray, power: float, phase: float) -> np.ndarray:
    ak = np.abs(k).astype(np.float64)
    mod = ak**power if power else np.ones_like(ak)
    if phase:
        return mod * np.exp(1j * np.sign(k) * phase * np.pi / 2)
    return mod.astype(np.complex128)


@lru_cache(maxsize=4096)
def _block_l2(s: int, power: float) -> float:
    # the block is symmetric, so sum over positive k and double
    pos = np.arange(1 << (s - 1), 1 << s, dtype=np.float64)
    return float(np.sqrt(2.0 * np.sum(pos ** (2 * power))))


class ArrayFactor(Factor1D):
    """Explicit 1-D coefficients on a sorted integer support."""

    def __init__(self, k: np.ndarray, c: np.ndarray):
        k = np.asarray(k, dtype=np.int64)
        c = np.asarray(c, dtype=np.complex128)
        keep = np.abs(c) >= DROP_BELOW
        self.k = k[keep]
        self.c = c[keep]

    @classmethod
    def from_pairs(cls, k: np.ndarray, c: np.ndarray) -> "ArrayFactor":
        order = np.argsort(k, kind="stable")
        return cls(np.asarray(k)[order], np.asarray(c)[order])

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        return self.k, self.c

    @property
    def max_freq(self) -> int:
        return int(np.max(np.abs(self.k))) if len(self.k) else 0

    @cached_property
    def is_real(self) -> bool:
        pos = dict(zip(self.k.tolist(), self.c))
        for kk, cc in pos.items():
            other = pos.get(-kk)
            if other is None or abs(other - np.conj(cc)) > 1e-14 * max(1.0, abs(cc)):
                return False
        return True

    def __repr__(self) -> str:
        return f"ArrayFactor(nnz={len(self.k)}, max_freq={self.max_freq})"


# ---------------------------------------------------------------------------
# separable representation


@dataclass(frozen=True)
class TensorTerm:
    weight: complex
    factors: tuple[Factor1D, ...]
    block: BlockIndex | None = None


class SeparableSum:
    """Sum of rank-1 terms ``weight * prod_j factor_j(x_j)``."""

    def __init__(self, d: int, terms: Iterable[TensorTerm]):
        self.d = int(d)
        self.terms = tuple(terms)
        for t in self.terms:
            if len(t.factors) != self.d:
                raise ValueError("term has wrong number of factors")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(d={self.d}, rank={len(self.terms)})"

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def max_freq(self) -> tuple[int, ...]:
        if not self.terms:
            return (0,) * self.d
        return tuple(max(t.factors[j].max_freq for t in self.terms) for j in range(self.d))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def zero_mean(self) -> bool:
        for t in self.terms:
            for f in t.factors:
                if np.any(f.coefficients()[0] == 0):
                    return False
        return True

    def to_sparse(self) -> SparseTrigPoly:
        keys, vals = [], []
        for t in self.terms:
            ks, cs = zip(*(f.coefficients() for f in t.factors))
            mesh = np.meshgrid(*ks, indexing="ij")
            cm = np.meshgrid(*cs, indexing="ij")
            keys.append(np.stack([m.ravel() for m in mesh], axis=1))
            v = np.full(mesh[0].size, complex(t.weight))
            for c in cm:
                v = v * c.ravel()
            vals.append(v)
        if not keys:
            return SparseTrigPoly(self.d)
        return SparseTrigPoly(self.d, np.concatenate(keys), np.concatenate(vals))

    def scaled(self, c: complex) -> "SeparableSum":
        return type(self)(self.d, [TensorTerm(t.weight * c, t.factors, t.block) for t in self.terms])

    def __mul__(self, c: complex) -> "SeparableSum":
        if isinstance(c, (SparseTrigPoly, SeparableSum)):
            return NotImplemented
        return self.scaled(complex(c))

    __rmul__ = __mul__

    def map_factors(self, fn) -> "SeparableSum":
        """Apply ``fn(j, factor) -> factor`` to every factor (keeps block tags)."""
        return type(self)(
            self.d, [TensorTerm(t.weight, tuple(fn(j, f) for j, f in enumerate(t.factors)), t.block) for t in self.terms]
        )


class TensorBlockPoly(SeparableSum):
    """Separable sum whose terms live on distinct dyadic blocks.

    Each term carries a block tag ``s`` and every factor ``j`` is supported in
    ``2^{s_j - 1} <= |k| < 2^{s_j}``. Hence ``delta_s`` of the polynomial is a
    single rank-1 term and its ``L_q`` norm is a product of 1-D norms.
    """

    def __init__(self, d: int, terms: Iterable[TensorTerm]):
        super().__init__(d, terms)
        seen: set[BlockIndex] = set()
        for t in self.terms:
            if t.block is None or len(t.block) != self.d:
                raise ValueError("every TensorBlockPoly term needs a block tag of length d")
            if t.block in seen:
                raise ValueError(f"duplicate block tag {t.block}")
            seen.add(t.block)
            for sj, f in zip(t.block, t.factors):
                if isinstance(f, BlockFactor):
                    if f.s != sj:
                        raise ValueError(f"factor block {f.s} does not match tag {t.block}")
                else:
                    k = np.abs(f.coefficients()[0])
                    if len(k) and (k.min() < (1 << (sj - 1)) or k.max() >= (1 << sj)):
                        raise ValueError(f"factor support leaves the dyadic interval of block {t.block}")
        self.terms = tuple(sorted(self.terms, key=lambda t: t.block))

    @property
    def block_tags(self) -> list[BlockIndex]:
        return [t.block for t in self.terms]

    @property
    def zero_mean(self) -> bool:
        return True

    def term(self, s: Sequence[int]) -> TensorTerm | None:
        s = tuple(s)
        for t in self.terms:
            if t.block == s:
                return t
        return None

    def l2(self) -> float:
        """Parseval value; blocks are mutually orthogonal."""
        tot = 0.0
        for t in self.terms:
            tot += abs(t.weight) ** 2 * math.prod(f.l2() ** 2 for f in t.factors)
        return math.sqrt(tot)

    def support_size(self) -> int:
        return sum(math.prod(len(f.coefficients()[0]) if not isinstance(f, BlockFactor) else (1 << f.s) for f in t.factors) for t in self.terms)


Poly = Union[SparseTrigPoly, SeparableSum]


# ---------------------------------------------------------------------------
# synthesis


def synthesize(f: Poly, grid: QuadratureGrid) -> np.ndarray:
    """Samples of ``sum f_hat(k) e^{i(k,x)}`` at ``x_j = 2 pi m_j / M_j``.

    Raises
    ------
    GridError
        If the grid does not resolve the support or is too large to allocate.
    """
    grid.check_covers(f.max_freq)
    if grid.npoints > DENSE_GRID_LIMIT:
        raise GridError(f"dense grid of {grid.npoints} points exceeds the limit {DENSE_GRID_LIMIT}")
    if isinstance(f, SeparableSum):
        f = f.to_sparse()
    buf = np.zeros(grid.sizes, dtype=np.complex128)
    if len(f):
        idx = tuple(np.mod(f.keys[:, j], grid.sizes[j]) for j in range(f.d))
        buf[idx] = f.vals
    return np.fft.ifftn(buf) * grid.npoints


def analyze(samples: np.ndarray, tol: float = 0.0) -> SparseTrigPoly:
    """Forward transform: recover coefficients from grid samples.

    Frequencies are mapped to the symmetric range ``-M/2 < k <= M/2``;
    entries with modulus ``<= tol`` are dropped.
    """
    samples = np.asarray(samples)
    sizes = samples.shape
    c = np.fft.fftn(samples) / samples.size
    idx = np.nonzero(np.abs(c) > tol)
    keys = np.stack([np.where(i > m // 2, i - m, i) for i, m in zip(idx, sizes)], axis=1)
    return SparseTrigPoly(len(sizes), keys, c[idx])


def separable_power_sum(f: SeparableSum, p: float, grid: QuadratureGrid, chunk_elems: int = 1 << 22) -> float:
    """``mean |f|^p`` over the grid, evaluating the low-rank form chunk by chunk.

    The first axis is processed in row chunks; the remaining axes are combined
    as a Khatri-Rao product of per-axis factor samples. Accumulation order is
    fixed, so results are reproducible bit for bit.
    """
    grid.check_covers(f.max_freq)
    if f.rank == 0:
        return 0.0
    real = all(f2.is_real for t in f.terms for f2 in t.factors) and all(
        complex(t.weight).imag == 0 for t in f.terms
    )
    dt = np.float64 if real else np.complex128
    per_axis = []
    for j in range(f.d):
        cols = []
        for t in f.terms:
            v = t.factors[j].samples(grid.sizes[j])
            cols.append(v.real if real else v)
        per_axis.append(np.stack(cols, axis=1).astype(dt))
    w = np.array([t.weight.real if real else t.weight for t in f.terms], dtype=dt)
    head = per_axis[0] * w[None, :]
    rest = per_axis[1:]
    if rest:
        kr = rest[0]
        for u in rest[1:]:
            kr = (kr[:, None, :] * u[None, :, :]).reshape(-1, f.rank)
        kr_t = np.ascontiguousarray(kr.T)
    else:
        kr_t = np.ones((f.rank, 1), dtype=dt)
    ncols = kr_t.shape[1]
    rows = max(1, chunk_elems // ncols)
    even = float(p).is_integer() and int(p) % 2 == 0
    total = 0.0
    for i in range(0, head.shape[0], rows):
        v = head[i : i + rows] @ kr_t
        if real and even:
            sq = v * v
            total += float(np.sum(sq ** (int(p) // 2)))
        else:
            total += float(np.sum(np.abs(v) ** p))
    return total / grid.npoints


# ---------------------------------------------------------------------------
# spectral operations


def delta_block(f: Poly, s: Sequence[int]) -> Poly:
    """Restriction of ``f`` to the dyadic block ``rho(s)``."""
    s = tuple(int(v) for v in s)
    if isinstance(f, TensorBlockPoly):
        t = f.term(s)
        return TensorBlockPoly(f.d, [t] if t is not None else [])
    if isinstance(f, SeparableSum):
        f = f.to_sparse()
    if len(f) == 0:
        return f
    mask = np.all(f.block_keys == np.asarray(s, dtype=np.int64), axis=1)
    return f.select(mask)


def restrict_to_cross(f: Poly, spec: CrossSpec) -> Poly:
    """Step-hyperbolic Fourier sum ``S_Q(f)``: keep coefficients whose block lies in the cross."""
    if isinstance(f, TensorBlockPoly):
        return TensorBlockPoly(f.d, [t for t in f.terms if spec.contains_block(t.block)])
    if isinstance(f, SeparableSum):
        f = f.to_sparse()
    if len(f) == 0:
        return f
    if not f.zero_mean:
        raise ValueError("restriction to a cross needs a zero-mean polynomial")
    inside = f.block_keys.astype(np.float64) @ np.asarray(spec.weights) < spec.n
    return f.select(inside)


def cross_remainder(f: Poly, spec: CrossSpec) -> Poly:
    """``f - S_Q(f)``."""
    if isinstance(f, TensorBlockPoly):
        return TensorBlockPoly(f.d, [t for t in f.terms if not spec.contains_block(t.block)])
    if isinstance(f, SeparableSum):
        f = f.to_sparse()
    if len(f) == 0:
        return f
    if not f.zero_mean:
        raise ValueError("restriction to a cross needs a zero-mean polynomial")
    inside = f.block_keys.astype(np.float64) @ np.asarray(spec.weights) < spec.n
    return f.select(~inside)


def weyl_multiplier(keys: np.ndarray, r: Sequence[float], alpha: Sequence[float]) -> np.ndarray:
    """``prod_j |k_j|^{r_j} exp(i sign(k_j) alpha_j pi / 2)`` for rows of ``keys``."""
    keys = np.asarray(keys, dtype=np.int64)
    out = np.ones(len(keys), dtype=np.complex128)
    for j, (rj, aj) in enumerate(zip(r, alpha)):
        kj = keys[:, j]
        out *= block_factor_values(kj, float(rj), float(aj))
    return out


def _vec(v, d: int, name: str) -> tuple[float, ...]:
    if np.isscalar(v):
        return (float(v),) * d
    v = tuple(float(x) for x in v)
    if len(v) != d:
        raise ValueError(f"{name} has length {len(v)}, expected {d}")
    return v


def weyl_derivative(f: Poly, r, alpha) -> Poly:
    """Weyl ``(r, alpha)``-derivative: multiply ``f_hat(k)`` by ``prod |k_j|^{r_j} e^{i sign(k_j) alpha_j pi/2}``.

    Raises
    ------
    ValueError
        If ``f`` is not zero-mean; the multiplier is undefined at ``k_j = 0``.
    """
    r = _vec(r, f.d, "r")
    alpha = _vec(alpha, f.d, "alpha")
    if isinstance(f, SeparableSum):
        if not f.zero_mean:
            raise ValueError("Weyl derivative needs a zero-mean polynomial")

        def deriv(j: int, fac: Factor1D) -> Factor1D:
            if isinstance(fac, BlockFactor):
                return fac.derivative(r[j], alpha[j])
            return fac.multiply(lambda k: block_factor_values(k, r[j], alpha[j]))

        return f.map_factors(deriv)
    if not f.zero_mean:
        raise ValueError("Weyl derivative needs a zero-mean polynomial (multiplier undefined at k_j = 0)")
    return f.with_values(f.vals * weyl_multiplier(f.keys, r, alpha))


def convolve(f: SparseTrigPoly, g: SparseTrigPoly) -> SparseTrigPoly:
    """Normalised convolution: coefficient-wise product on the common support."""
    f, g = f.to_sparse(), g.to_sparse()
    f._check(g)
    if len(f) == 0 or len(g) == 0:
        return SparseTrigPoly(f.d)
    both = np.concatenate([f.keys, g.keys])
    order = np.lexsort(both.T[::-1])
    both = both[order]
    src = np.concatenate([np.zeros(len(f), dtype=int), np.ones(len(g), dtype=int)])[order]
    pos = np.concatenate([np.arange(len(f)), np.arange(len(g))])[order]
    same = np.all(both[1:] == both[:-1], axis=1)
    i = np.flatnonzero(same)
    fi = np.where(src[i] == 0, pos[i], pos[i + 1])
    gi = np.where(src[i] == 0, pos[i + 1], pos[i])
    return SparseTrigPoly(f.d, f.keys[fi], f.vals[fi] * g.vals[gi])


# ---------------------------------------------------------------------------
# coefficient file format


def write_coeffs(f: Poly, path: str | Path) -> None:
    """Write ``d=<int>`` then one ``k_1 ... k_d re im`` line per coefficient."""
    f = f.to_sparse()
    lines = [f"d={f.d}"]
    for k, c in zip(f.keys, f.vals):
        lines.append(" ".join(str(int(v)) for v in k) + f" {float(c.real)!r} {float(c.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_coeffs(path: str | Path) -> SparseTrigPoly:
    """Read the text coefficient format; duplicate keys are rejected."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln.strip() for ln in text if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or not rows[0].startswith("d="):
        raise ValueError(f"{path}: first line must be 'd=<int>'")
    try:
        d = int(rows[0][2:])
    except ValueError:
        raise ValueError(f"{path}: bad dimension header {rows[0]!r}") from None
    if d < 1:
        raise ValueError(f"{path}: dimension must be >= 1")
    seen: dict[tuple[int, ...], complex] = {}
    for lineno, ln in enumerate(rows[1:], start=2):
        parts = ln.split()
        if len(parts) != d + 2:
            raise ValueError(f"{path}:{lineno}: expected {d + 2} fields, got {len(parts)}")
        k = tuple(int(v) for v in parts[:d])
        if k in seen:
            raise ValueError(f"{path}:{lineno}: duplicate frequency {k}")
        seen[k] = complex(float(parts[d]), float(parts[d + 1]))
    return SparseTrigPoly.from_dict(d, seen)
