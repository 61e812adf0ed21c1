"""End-to-end experiment: synthetic instance -> cluster sweep -> hubs ->
all four flow scenarios -> normalized comparison table.

Usage: python3 scripts/run_pipeline.py [--seed 42] [--format markdown]
"""

import argparse
import time

from hubspoke.config import AppConfig
from hubspoke.fcm import sweep_cluster_counts
from hubspoke.model import generate_synthetic
from hubspoke.report import compare_scenarios, render_comparison, render_sweep
from hubspoke.scenarios import expand, solve_scenario
from hubspoke.session import open_session
from hubspoke.vrptw import Budget


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--points", type=int, default=77)
    ap.add_argument("--blobs", type=int, default=3)
    ap.add_argument("--parcels", type=int, default=150)
    ap.add_argument("--format", choices=["csv", "markdown", "json"], default="markdown")
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()

    cfg = AppConfig()
    t0 = time.monotonic()
    inst = generate_synthetic(seed=args.seed, n_points=args.points,
                              n_blobs=args.blobs, parcels_per_day=args.parcels)
    rows = sweep_cluster_counts(inst.points, [2, 3, 4, 5])
    print(render_sweep(rows, args.format))
    best = min(rows, key=lambda r: r.approx_cost)
    print(f"chosen c={best.c}\n")

    design = open_session(best.clustering, inst.points).finalize()
    for i, h in enumerate(design.hubs):
        print(f"hub {i}: ({h.lat:.6f}, {h.lon:.6f})")
    print()

    budget = Budget(max_seconds=60.0, max_iters=50_000)
    results = {}
    for sid in ("S0", "S1", "S2", "S3"):
        plan = expand(design, inst, sid, cfg)
        results[sid] = solve_scenario(plan, inst, cfg, budget=budget,
                                      seed=0, jobs=args.jobs)
    print(render_comparison(compare_scenarios(results), args.format))
    print(f"total {time.monotonic() - t0:.1f}s")


if __name__ == "__main__":
    main()
