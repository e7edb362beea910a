#!/usr/bin/env python3
"""Run the standard benchmark grid and write JSON + CSV reports.

The grid covers 100x2 through 4000x1024 (pass --large to add 40000x1024) with
the kd-tree baseline, the Voronoi tree under kmeans++ and median seeding, and
the n-cube occupancy statistics. Times go to stdout and reports to --out.
"""

import argparse
from pathlib import Path

from spacepart.bench import BenchConfig, emit_report, standard_grid, run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="bench_out")
    ap.add_argument("--large", action="store_true", help="include the 40000x1024 cell")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("-m", type=int, default=8)
    args = ap.parse_args()

    cfg = BenchConfig(
        datasets=standard_grid(include_large=args.large),
        schemes=("kdtree", "vtree:kmeanspp", "vtree:median", "grid-stats"),
        m_values=(args.m,),
        repetitions=args.reps,
        seed=args.seed,
    )
    report = run_benchmark(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_report(report, "json", out / "report.json")
    emit_report(report, "csv", out / "report.csv")

    print(f"reports in {out}/")
    for cell in report.cells:
        t = f"{cell['median_time_s']:.4f}s" if cell["status"] == "ok" else cell["reason"]
        bias = ""
        if cell.get("metrics"):
            bias = f"  bias={cell['metrics']['bias']:.3f} affected={cell['metrics']['affected_count']}"
        print(f"{cell['scheme']:18s} {cell['dataset']:12s} {t}{bias}")


if __name__ == "__main__":
    main()
