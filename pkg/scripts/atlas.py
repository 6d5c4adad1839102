"""Resonance atlas: block labels on a grid of action space, written as CSV.

    python3 scripts/atlas.py --n 2 --K 3 --grid 200 --out atlas.csv
"""
import argparse

import numpy as np

from nekhlab.domain import DomainSpec, FrequencyMap
from nekhlab.geometry import Schedule, atlas, covering_check, write_atlas


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--K", type=int, default=3)
    ap.add_argument("--sigma1", type=float, default=0.2)
    ap.add_argument("--grid", type=int, default=100)
    ap.add_argument("--hi", type=float, default=6.5)
    ap.add_argument("--out", default="atlas.csv")
    a = ap.parse_args()
    S = Schedule.from_stability(a.n, a.K, 1.0, a.sigma1)
    om = FrequencyMap.affine(np.eye(a.n))
    X = DomainSpec(((0.0, a.hi),) * a.n).grid(a.grid)
    rows = atlas(X, om, S)
    write_atlas(a.out, rows)
    counts = np.bincount([r["r"] for r in rows], minlength=a.n + 1)
    print("alpha_r:", ", ".join(f"{S.a(r):.4g}" for r in range(1, a.n + 1)))
    print("nodes per block dimension:", counts.tolist(), " covering:", covering_check(X, om, S))


if __name__ == "__main__":
    main()
