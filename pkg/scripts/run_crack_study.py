#!/usr/bin/env python3
"""Sweep the 2D crack scenarios over seeds and horizons; print one row per
run with the measured energy and perimeter constants."""

import argparse

from jumpfree import scenarios as sc
from jumpfree.approx2d import approximate_2d


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--spacing", type=float, default=1 / 64)
    args = ap.parse_args()

    print("seed  energy_ratio  perim/(e^T H1)  t0      pass")
    for seed in range(args.seeds):
        u = sc.random_crack_function(seed, spacing=args.spacing)
        res = approximate_2d(u, T=args.T)
        vals = {e.name: e.value for e in res.report.entries}
        import math
        per_const = vals["perimeter_omega"] / (
            math.exp(args.T) * vals["jump_mass_H1"])
        print(f"{seed:4d}  {vals['energy_w'] / vals['energy_u']:.6f}      "
              f"{per_const:8.4f}   {res.t0:.4f}  "
              f"{res.report.all_passed()}")


if __name__ == "__main__":
    main()
