"""Print the Bernstein probe ratios and Nikolskii sharpness across levels.

    python3 scripts/bernstein_nikolskii.py --p 2 4 --n 4 12
"""

from __future__ import annotations

import argparse

import numpy as np

from hypcross.analysis import bernstein_probe, nikolskii_check
from hypcross.trigpoly import SparseTrigPoly


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 4.0])
    ap.add_argument("--n", type=int, nargs=2, default=[4, 11], metavar=("LO", "HI"))
    args = ap.parse_args()
    lo, hi = args.n
    print("Bernstein: ||t^(r)||_p / ||t||_p / 2^n for the top shell of Q^1_n (d=2, r1=1)")
    print("n    " + "  ".join(f"p={p:<6g}" for p in args.p))
    for n in range(lo, hi + 1):
        print(f"{n:<4d} " + "  ".join(f"{bernstein_probe(n, p):<8.4f}" for p in args.p))
    print()
    print("Nikolskii ratio lhs/rhs for the 1-D Dirichlet kernel, (q, p) = (2, 4)")
    for e in range(3, 13):
        m = 2**e
        t = SparseTrigPoly(1, np.arange(-m, m + 1)[:, None], np.ones(2 * m + 1))
        print(f"m=2^{e:<3d} {nikolskii_check(t, 4.0, 2.0).ratio:.5f}")


if __name__ == "__main__":
    main()
