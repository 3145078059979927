"""Generator mini-language for sweeps and the command line.

Examples::

    g1(p=2, r1=1)              # n taken from the sweep level, C_5 fixed at level 14
    g1(p=2, r1=1, c5="level")  # C_5 renormalised at every level
    dn(n=8, d=3)
    bernoulli(r=[1,2], alpha=[0,0], N=12)
    tail2(depth=8, r=[1,1])
    rand(seed=3, n=9)
    w1(r=[1,1], N=2097152)
    file(coeffs.txt)

Every generator accepts ``d`` (default 2, or the length of ``r``).
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from typing import Any

from hypcross.index import CrossSpec, cross_blocks, make_profile
from hypcross.kernels import (
    bernoulli_region,
    bernoulli_tensor,
    dn_poly,
    g1_poly,
    g1_scale,
    random_poly,
    tail_extremal_l2,
    w1_representative,
)
from hypcross.trigpoly import Poly, read_coeffs

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$", re.S)

ALLOWED = {
    "bernoulli": {"r", "alpha", "N", "d"},
    "dn": {"n", "d"},
    "g1": {"n", "p", "r1", "d", "c5", "ref"},
    "tail2": {"n", "depth", "r", "d", "alpha"},
    "rand": {"seed", "n", "d", "law"},
    "w1": {"r", "alpha", "N", "d"},
    "file": set(),
}

W1_DEFAULT_N = 1 << 21
G1_REF_LEVEL = 14


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    """A parsed generator; call with the sweep level to build the polynomial."""

    name: str
    args: dict[str, Any] = field(default_factory=dict)
    path: str | None = None
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def level_free(self) -> bool:
        """True when the output does not depend on the sweep level."""
        return self.name in ("file", "w1") or "n" in self.args or (self.name == "bernoulli" and "N" in self.args)

    @property
    def d(self) -> int:
        if "d" in self.args:
            return int(self.args["d"])
        if "r" in self.args and not isinstance(self.args["r"], (int, float)):
            return len(self.args["r"])
        return 2

    def _vec(self, key: str, default: float) -> tuple[float, ...]:
        v = self.args.get(key, default)
        if isinstance(v, (int, float)):
            return (float(v),) * self.d
        v = tuple(float(x) for x in v)
        if len(v) != self.d:
            raise GeneratorError(f"{self.name}: {key} has length {len(v)}, expected d={self.d}")
        return v

    @property
    def default_r(self) -> tuple[float, ...]:
        """Smoothness vector implied by the generator, used for cross weights."""
        if self.name == "g1":
            return (float(self.args.get("r1", 1.0)),) * self.d
        if self.name in ("bernoulli", "tail2", "w1"):
            return self._vec("r", 1.0)
        return (1.0,) * self.d

    def level(self, n: int | None) -> int:
        if "n" in self.args:
            return int(self.args["n"])
        if n is None:
            raise GeneratorError(f"{self.name}: no level given and none supplied by the sweep")
        return int(n)

    def __call__(self, n: int | None = None) -> Poly:
        if self.level_free:
            if "f" not in self._memo:
                self._memo["f"] = self._build(None)
            return self._memo["f"]
        return self._build(n)

    def _build(self, n: int | None) -> Poly:
        d = self.d
        if self.name == "file":
            return read_coeffs(self.path)
        if self.name == "dn":
            return dn_poly(self.level(n), d)
        if self.name == "g1":
            return self._g1(self.level(n))
        if self.name == "tail2":
            prof = make_profile(self._vec("r", 1.0))
            return tail_extremal_l2(self.level(n), prof, depth=int(self.args.get("depth", 8)),
                                    alpha=self._vec("alpha", 0.0))
        if self.name == "rand":
            lev = self.level(n)
            region = cross_blocks(CrossSpec.ones(lev, d))
            return random_poly(int(self.args.get("seed", 0)), region, str(self.args.get("law", "unit")), d=d)
        if self.name == "bernoulli":
            r, alpha = self._vec("r", 1.0), self._vec("alpha", 0.0)
            prof = make_profile(r)
            if "N" in self.args:
                region = cross_blocks(CrossSpec(float(self.args["N"]), prof.gamma))
            else:
                region = bernoulli_region(prof, self.level(n))
            return bernoulli_tensor(r, alpha, region, d)
        if self.name == "w1":
            N = int(self.args.get("N", W1_DEFAULT_N))
            return w1_representative(self._vec("r", 1.0), self._vec("alpha", 0.0), N)
        raise GeneratorError(f"unknown generator {self.name!r}")  # pragma: no cover


    def _g1(self, n: int) -> Poly:
        # C_5 is one constant for the whole sweep, fixed at a reference level; with
        # c5="level" it is recomputed so that ||g_1^{(r)}||_p = 1 at every n.
        p, r1, d = float(self.args.get("p", 2.0)), float(self.args.get("r1", 1.0)), self.d
        c5 = self.args.get("c5")
        if c5 == "level":
            return g1_poly(n, p, r1, d)[0]
        if c5 is None:
            key = ("c5", p, r1, d)
            if key not in self._memo:
                self._memo[key] = g1_poly(int(self.args.get("ref", G1_REF_LEVEL)), p, r1, d)[1]
            c5 = self._memo[key]
        if not isinstance(c5, (int, float)) or c5 <= 0:
            raise GeneratorError('g1: c5 must be a positive number or "level"')
        return dn_poly(n, d).scaled(float(c5) * g1_scale(n, p, r1, d))


def parse_generator(text: str) -> Generator:
    """Parse ``name(key=value, ...)``; values are Python literals (numbers, lists)."""
    m = _CALL.match(text)
    if not m:
        raise GeneratorError(f"bad generator spec {text!r}; expected name(key=value, ...)")
    name, inner = m.group(1), m.group(2).strip()
    if name not in ALLOWED:
        raise GeneratorError(f"unknown generator {name!r}; known: {', '.join(sorted(ALLOWED))}")
    if name == "file":
        path = inner.strip().strip("'\"")
        if path.startswith("path="):
            path = path[5:].strip("'\"")
        if not path:
            raise GeneratorError("file() needs a path")
        return Generator(name, {}, path)
    try:
        call = ast.parse(f"_({inner})", mode="eval").body
    except SyntaxError as exc:
        raise GeneratorError(f"cannot parse arguments of {text!r}: {exc.msg}") from None
    if call.args:
        raise GeneratorError(f"{name}: arguments must be given as key=value")
    args: dict[str, Any] = {}
    for kw in call.keywords:
        if kw.arg not in ALLOWED[name]:
            raise GeneratorError(f"{name}: unknown argument {kw.arg!r}; allowed: {', '.join(sorted(ALLOWED[name]))}")
        try:
            args[kw.arg] = ast.literal_eval(kw.value)
        except ValueError:
            raise GeneratorError(f"{name}: value of {kw.arg!r} is not a literal") from None
    for key, v in args.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise GeneratorError(f"{name}: {key} must be finite")
    return Generator(name, args)
