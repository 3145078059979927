"""Reproduce the predicted-rate table at desk scale.

For each case a sweep is run, written to ``<out>/<case>.csv``, fitted with
the two smallest levels dropped, and compared with the predicted exponents.
A markdown table goes to stdout and ``<out>/rate_table.md``.

    python3 scripts/rate_table.py --out results/
    python3 scripts/rate_table.py --only g1_T3 tail2_T1
"""

from __future__ import annotations

import argparse
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from hypcross.analysis import RateCase, rate_fit, theory_rate
from hypcross.approx import error_sweep, reports_to_csv
from hypcross.generators import parse_generator
from hypcross.index import make_profile
from hypcross.norms import NormSpec

log = logging.getLogger("rate_table")


@dataclass(frozen=True)
class Case:
    name: str
    gen: str
    n: range
    r: tuple[float, ...]
    variant: str
    space: str
    theorem: str
    p: float
    q: float | None = None
    column: str = "value_EE"


CASES = [
    Case("g1_T3", "g1(p=2, r1=1)", range(6, 15), (1.0, 1.0), "gamma", "bq1:4", "T3", 2.0, 4.0),
    Case("g1_D", "g1(p=2, r1=1)", range(6, 15), (1.0, 1.0), "gamma", "lq:4", "D", 2.0, 4.0),
    Case("tail2_T1", "tail2(r=[1,1])", range(6, 17), (1.0, 1.0), "gamma_prime", "bq1:2", "T1", 2.0),
    Case("tail2_T1_aniso", "tail2(r=[1,2])", range(6, 17), (1.0, 2.0), "gamma_prime", "bq1:2", "T1", 2.0),
    Case("tail2_G", "tail2(r=[1,1])", range(6, 17), (1.0, 1.0), "gamma_prime", "lq:2", "G", 2.0),
    Case("tail2_T1_d3", "tail2(r=[1,1,1], depth=6)", range(8, 15), (1.0, 1.0, 1.0), "gamma_prime", "bq1:2",
         "T1", 2.0),
    Case("w1_T2", "w1(r=[1,1])", range(8, 17), (1.0, 1.0), "gamma_prime", "bq1a:1", "T2", 1.0,
         column="value_E_upper"),
]


def run_case(case: Case, out: Path) -> dict:
    t0 = time.perf_counter()
    gen = parse_generator(case.gen)
    reports = error_sweep(gen, case.n, make_profile(case.r), case.variant, NormSpec.parse(case.space))
    (out / f"{case.name}.csv").write_text(reports_to_csv(reports), encoding="utf-8")
    fit = rate_fit([(r.n, getattr(r, case.column)) for r in reports], skip_smallest=2)
    a, b = theory_rate(RateCase(case.theorem, case.r, case.p, case.q))
    dt = time.perf_counter() - t0
    log.info("%s done in %.1fs", case.name, dt)
    return {"case": case, "fit": fit, "pred": (a, b), "seconds": dt}


def to_markdown(rows: list[dict]) -> str:
    head = "| case | space | rate | predicted (a, b) | fitted a | fitted b | window | residual |\n"
    head += "|---|---|---|---|---|---|---|---|\n"
    body = ""
    for row in rows:
        c, f, (a, b) = row["case"], row["fit"], row["pred"]
        body += (f"| {c.name} | {c.space} | {c.theorem} | ({a:.3g}, {b:.3g}) | {f.a:.4f} | {f.b:.4f} | "
                 f"{int(f.window[0])}..{int(f.window[1])} | {f.residual:.1e} |\n")
    return head + body


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results", help="output directory (default: results)")
    ap.add_argument("--only", nargs="*", help="run only these case names")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cases = [c for c in CASES if not args.only or c.name in args.only]
    if not cases:
        ap.error(f"no case matches {args.only}; known: {', '.join(c.name for c in CASES)}")
    table = to_markdown([run_case(c, out) for c in cases])
    (out / "rate_table.md").write_text(table, encoding="utf-8")
    print(table, end="")


if __name__ == "__main__":
    main()
