"""Sensitivity of the hand-off scenario to the collection radius: how the
delivery bucket and truck count shrink as more spokes collect at their hub.

Usage: python3 scripts/handoff_radius_study.py [--seed 42]
"""

import argparse

from hubspoke.config import AppConfig
from hubspoke.fcm import sweep_cluster_counts
from hubspoke.model import generate_synthetic
from hubspoke.scenarios import expand, solve_scenario
from hubspoke.session import open_session
from hubspoke.vrptw import Budget


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--radii", type=float, nargs="+",
                    default=[0.0, 0.5, 1.0, 2.0, 3.0, 5.0])
    args = ap.parse_args()

    inst = generate_synthetic(seed=args.seed)
    rows = sweep_cluster_counts(inst.points, [2, 3, 4, 5])
    best = min(rows, key=lambda r: r.approx_cost)
    design = open_session(best.clustering, inst.points).finalize()
    budget = Budget(max_seconds=60.0, max_iters=50_000)

    print(f"{'radius_km':>9}  {'handoff':>7}  {'trucks':>6}  {'delivery':>9}  {'total':>9}")
    for radius in args.radii:
        cfg = AppConfig(handoff_radius_km=radius)
        plan = expand(design, inst, "S3", cfg)
        res = solve_scenario(plan, inst, cfg, budget=budget, seed=0, jobs=4)
        print(f"{radius:>9.1f}  {len(plan.handoff_parcels):>7}  {res.trucks_used:>6}"
              f"  {res.delivery_cost:>9.2f}  {res.total_cost:>9.2f}")


if __name__ == "__main__":
    main()
