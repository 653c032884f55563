#!/usr/bin/env python3
"""Export root trajectories of an evolving generating function to CSV.

Tracks all roots of the law of a pure quadratic-death chain started from a
real-rooted initial condition, over a log-spaced time grid.

Usage: python scripts/export_root_trajectories.py [n] [w] [out.csv]
"""

import sys

import numpy as np

from stablepgf.bdchain import BirthDeathRates, evolve
from stablepgf.measures import Measure
from stablepgf.polycore import UniPoly, real_roots


def main(n: int, w: float, path: str) -> None:
    base = UniPoly.from_roots([w] * n).coeffs_float()
    mu = Measure(base / base.sum())
    rates = BirthDeathRates.quadratic_death()
    rows = []
    for t in np.logspace(-6, 0, 25):
        ev = evolve(mu, rates, float(t), tol=1e-13)
        for i, z in enumerate(real_roots(ev.poly).roots):
            rows.append((float(t), i, z.real, z.imag))
    with open(path, "w") as fh:
        fh.write("t,root_index,re,im\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    w = float(sys.argv[2]) if len(sys.argv) > 2 else -0.5
    out = sys.argv[3] if len(sys.argv) > 3 else "root_trajectories.csv"
    main(n, w, out)
