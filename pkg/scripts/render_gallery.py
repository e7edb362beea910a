#!/usr/bin/env python3
"""Render a gallery of 2-D partitionings: every scheme at m=4 and m=8.

Produces one SVG per (data kind, scheme, m) combination, on uniform data and
on a four-cluster Gaussian mixture. Voronoi cells show as contiguous convex
regions, kd-tree leaves as axis-aligned rectangles.
"""

import argparse
from pathlib import Path

from spacepart.core import generate_gaussian_mixture, generate_uniform
from spacepart.kdtree import kd_partition
from spacepart.render import render_2d
from spacepart.vtree import build_vtree


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="gallery")
    ap.add_argument("-n", type=int, default=1200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eps", type=float, default=1.0, help="affected-point margin to visualize")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    datasets = {
        "uniform": generate_uniform(args.n, 2, seed=args.seed),
        "mixture": generate_gaussian_mixture(args.n, 2, k=4, spread=6.0, seed=args.seed),
    }
    for data_name, ds in datasets.items():
        for m in (4, 8):
            kd = kd_partition(ds, m, eps=args.eps)
            render_2d(ds, kd.assignment, out / f"{data_name}_kdtree_m{m}.svg")
            for strategy in ("random", "gnat", "kmeanspp", "median"):
                vt = build_vtree(ds, m, strategy=strategy, eps=args.eps, seed=args.seed)
                render_2d(ds, vt.leaf_assignment, out / f"{data_name}_vtree_{strategy}_m{m}.svg")
    print(f"gallery in {out}/")


if __name__ == "__main__":
    main()
