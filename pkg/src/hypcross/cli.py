"""Command-line interface: ``hypcross {cross,sweep,fit,check,norm}``.

Exit codes: 0 success, 1 runtime failure (including failed checks), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from hypcross.analysis import SUITES, HypothesisError, RateCase, rate_fit, records_to_json, run_suite, theory_rate
from hypcross.approx import error_sweep, read_sweep_csv, reports_to_csv
from hypcross.generators import GeneratorError, parse_generator
from hypcross.index import CrossSpec, block_size, cross_blocks, make_profile
from hypcross.norms import NormSpec

log = logging.getLogger("hypcross")

VARIANTS = ("gamma", "gamma_prime", "ones")


class UsageError(Exception):
    """Bad input from the user; maps to exit code 2."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def parse_n_range(text: str) -> tuple[int, ...]:
    """``"6..14"`` (inclusive) or ``"6,8,10"``; ``"7..6"`` is empty."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return tuple(range(int(lo), int(hi) + 1))
        if not text:
            return ()
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad n range {text!r}; use e.g. 6..14 or 6,8,10") from None


def read_config(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


@dataclass
class ExperimentConfig:
    generator: str
    n_values: tuple[int, ...]
    variant: str = "gamma"
    space: str = "bq1:2"
    seed: int = 0
    out: str | None = None
    r: tuple[float, ...] | None = None
    oversample: float | None = None
    extra: dict = field(default_factory=dict)

    KEYS = ("gen", "n", "variant", "space", "seed", "out", "r", "oversample")

    @classmethod
    def from_mapping(cls, m: dict[str, str]) -> "ExperimentConfig":
        unknown = set(m) - set(cls.KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}; allowed: {', '.join(cls.KEYS)}")
        if "gen" not in m:
            raise UsageError("sweep needs a generator (--gen or gen=...)")
        if "n" not in m:
            raise UsageError("sweep needs a level range (--n or n=...)")
        variant = m.get("variant", "gamma")
        if variant not in VARIANTS:
            raise UsageError(f"variant must be one of {', '.join(VARIANTS)}, got {variant!r}")
        try:
            seed = int(m.get("seed", "0"))
            r = tuple(float(v) for v in m["r"].split(",")) if m.get("r") else None
            os_ = float(m["oversample"]) if m.get("oversample") else None
        except ValueError as exc:
            raise UsageError(f"bad config value: {exc}") from None
        return cls(m["gen"], parse_n_range(m["n"]), variant, m.get("space", "bq1:2"), seed, m.get("out"), r, os_)


# ---------------------------------------------------------------------------
# commands


def cmd_cross(args: argparse.Namespace) -> int:
    d = args.d
    weights = args.weights if args.weights is not None else (1.0,) * d
    if len(weights) != d:
        raise UsageError(f"--weights has {len(weights)} entries, expected d={d}")
    try:
        spec = CrossSpec(args.n, weights)
    except ValueError as exc:
        raise UsageError(f"--weights: {exc}") from None
    blocks = cross_blocks(spec)
    w = ",".join(format(v, "g") for v in spec.weights)
    print(f"# step-hyperbolic cross d={d} n={args.n} weights={w}")
    total = 0
    for s in blocks:
        size = block_size(s)
        total += size
        print("block " + " ".join(str(v) for v in s) + f" size {size}")
    print(f"blocks {len(blocks)}")
    print(f"cardinality {total}")
    return 0


def _sweep_config(args: argparse.Namespace) -> ExperimentConfig:
    m: dict[str, str] = {}
    if args.config:
        m.update(read_config(args.config))
    for tok in args.overrides:
        if "=" not in tok:
            raise UsageError(f"positional arguments must be key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        m[k.strip()] = v.strip()
    for key, val in (("gen", args.gen), ("n", args.n), ("variant", args.variant), ("space", args.space),
                     ("seed", args.seed), ("out", args.out), ("r", args.r), ("oversample", args.oversample)):
        if val is not None:
            m[key] = str(val)
    return ExperimentConfig.from_mapping(m)


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _sweep_config(args)
    try:
        gen = parse_generator(cfg.generator)
        space = NormSpec.parse(cfg.space)
    except (GeneratorError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if gen.name == "rand" and "seed" not in gen.args:
        gen = parse_generator(cfg.generator.rstrip()[:-1] + (", " if gen.args else "") + f"seed={cfg.seed})")
    r = cfg.r if cfg.r is not None else gen.default_r
    if len(r) != gen.d:
        raise UsageError(f"smoothness vector has {len(r)} entries, generator has d={gen.d}")
    try:
        profile = make_profile(r)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    log.info("sweep %s over n=%s, cross=%s, space=%s", cfg.generator, list(cfg.n_values), cfg.variant, space.label)
    reports = error_sweep(gen, cfg.n_values, profile, cfg.variant, space, cfg.seed, cfg.oversample)
    text = reports_to_csv(reports)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    try:
        rows = read_sweep_csv(args.csv)
    except OSError as exc:
        raise UsageError(f"cannot read {args.csv!r}: {exc.strerror}") from None
    if rows and args.column not in rows[0]:
        raise UsageError(f"column {args.column!r} not in CSV; columns: {', '.join(rows[0])}")
    if not rows:
        raise ValueError("CSV has no data rows")
    pts = [(float(row["n"]), float(row[args.column])) for row in rows]
    fit = rate_fit(pts, skip_smallest=args.skip)
    out: dict = {
        "column": args.column,
        "a": fit.a,
        "b": fit.b,
        "log2C": fit.log2C,
        "residual": fit.residual,
        "n_points": fit.n_points,
        "window": list(fit.window),
        "skipped_smallest": args.skip,
    }
    if args.theorem:
        q = args.q
        if q is None:
            space = rows[0].get("space", "")
            try:
                q = NormSpec.parse(space).p
            except ValueError:
                raise UsageError("--q not given and the CSV space column is not parseable") from None
        p = args.p if args.p is not None else q
        try:
            case = RateCase(args.theorem, args.r, p, q)
            a, b = theory_rate(case)
        except (HypothesisError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        out["theorem"] = case.theorem
        out["predicted"] = {"a": a, "b": b}
        out["deviation"] = {"a": abs(fit.a - a), "b": abs(fit.b - b)}
    print(json.dumps(out, indent=1, sort_keys=True))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    records = []
    for name in names:
        recs = run_suite(name, args.seed)
        bad = sum(1 for r in recs if not r.passed)
        log.info("suite %s: %d checks, %d failed", name, len(recs), bad)
        records.extend(recs)
    text = records_to_json(records)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    failed = sum(1 for r in records if not r.passed)
    print(f"{len(records) - failed}/{len(records)} checks passed", file=sys.stderr)
    return 1 if failed else 0


def cmd_norm(args: argparse.Namespace) -> int:
    try:
        gen = parse_generator(args.gen)
        space = NormSpec.parse(args.space)
    except (GeneratorError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    f = gen(args.n)
    print(format(space.evaluate(f), ".12g"))
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypcross", description="Step-hyperbolic cross approximation experiments.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cross", help="list the blocks and cardinality of a cross")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weights", type=parse_floats, default=None, help="comma-separated, each >= 1 (default all ones)")
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("sweep", help="error sweep over levels, written as CSV")
    p.add_argument("--config", help="file of key=value lines")
    p.add_argument("--gen", help="generator, e.g. 'g1(p=2,r1=1)'")
    p.add_argument("--n", help="levels, e.g. 6..14")
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--space", help="lq:<q>, bq1:<q> (delta blocks) or bq1a:<q> (A_s blocks)")
    p.add_argument("--seed", type=int)
    p.add_argument("--r", help="smoothness vector for the cross weights (default from the generator)")
    p.add_argument("--oversample", type=float)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("overrides", nargs="*", help="extra key=value settings")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit 2^{-a n} n^b to a sweep column")
    p.add_argument("csv")
    p.add_argument("--column", default="value_EE")
    p.add_argument("--skip", type=int, default=2, help="drop this many smallest n (default 2)")
    p.add_argument("--theorem", help="compare with a predicted rate (T1, T2, T3, T4, Remark1, G, D, E, ...)")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=parse_floats, default=(1.0, 1.0))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check", help="run a verification suite and print JSON")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("norm", help="evaluate a norm of a generated function")
    p.add_argument("--gen", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_norm)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hypcross {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"hypcross {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
