#!/usr/bin/env python3
"""Sweep the 3D ribbon scenarios over seeds; print the exceptional-set
volume/perimeter ratios and the transverse Poincare error per run."""

import argparse
import math

from jumpfree import scenarios as sc
from jumpfree.approx3d import approximate_3d, poincare_profile
from jumpfree.gsbv import dirichlet_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--T", type=float, default=1.0)
    args = ap.parse_args()

    print("seed  vol/(e^T trans)  perim2_ratio  poincare_ratio  pass")
    for seed in range(args.seeds):
        u = sc.random_ribbon_function(seed)
        res = approximate_3d(u, T=args.T,
                             cover_radius=u.meta["cover_radius"])
        vals = {e.name: e.value for e in res.report.entries}
        a, err = poincare_profile(u, res.w, res.omega)
        eu = dirichlet_energy(u, "spatial")
        vol_ratio = vals["volume_omega"] / (
            math.exp(args.T) * max(vals["transverse_mass"], 1e-300))
        print(f"{seed:4d}  {vol_ratio:12.4f}   "
              f"{vals['directional_perimeter_2_ratio']:10.4f}   "
              f"{err / eu if eu > 0 else 0.0:12.6f}  "
              f"{res.report.all_passed()}")


if __name__ == "__main__":
    main()
