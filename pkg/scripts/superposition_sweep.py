#!/usr/bin/env python3
"""Residual of the sum of one-well candidates against well separation:
small when the supports are disjoint, large when they overlap."""

import argparse

from nlgauge.verify import superposition_residual_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--l", type=float, default=1e3)
    ap.add_argument("--count", type=int, default=521)
    ap.add_argument("--separations", type=float, nargs="+",
                    default=[1.3, 1.6, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0])
    args = ap.parse_args()

    rows = superposition_residual_sweep(args.separations, l=args.l,
                                        count=args.count)
    print(f"{'separation':>12s} {'sum residual':>14s}")
    for d, r in rows:
        print(f"{d:12.2f} {r:14.4e}")


if __name__ == "__main__":
    main()
