"""Network-level objective and center-of-gravity hub placement.

The approximate transportation cost of a partition is the sum of all
ordered inter-centroid distances plus every point's distance to its own
centroid, all Haversine. Reports also carry the halved (unordered-pair)
inter-hub variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geo import GeoPoint, haversine_km
from .model import DemandPoint


class DesignError(ValueError):
    """Raised on partition violations (e.g. empty cluster, zero demand)."""


@dataclass(frozen=True)
class DesignMetrics:
    approx_cost_km: float
    interhub_km: float
    intracluster_km: float
    cluster_demand: tuple[float, ...]
    demand_cv: float
    cluster_sizes: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "approx_cost_km": self.approx_cost_km,
            "interhub_km": self.interhub_km,
            "interhub_km_unordered": self.interhub_km / 2.0,
            "intracluster_km": self.intracluster_km,
            "cluster_demand": list(self.cluster_demand),
            "demand_cv": self.demand_cv,
            "cluster_sizes": list(self.cluster_sizes),
        }


def _clusters_of(assignment: Sequence[int], k: int) -> list[list[int]]:
    members: list[list[int]] = [[] for _ in range(k)]
    for i, c in enumerate(assignment):
        if c < 0 or c >= k:
            raise DesignError(f"cluster index {c} out of range for k={k}")
        members[c].append(i)
    for c, mem in enumerate(members):
        if not mem:
            raise DesignError(f"empty cluster: {c}")
    return members


def approx_cost(points: Sequence[DemandPoint], assignment: Sequence[int],
                centroids: Sequence[GeoPoint], demand: str = "delivery") -> DesignMetrics:
    """Evaluate the partition objective plus capacity-balance metrics.

    Inter-hub term sums over ordered centroid pairs (each unordered pair
    counted twice); intracluster term sums point-to-own-centroid distances.
    """
    if len(points) != len(assignment):
        raise DesignError("assignment length must match points")
    k = len(centroids)
    members = _clusters_of(assignment, k)

    interhub = 0.0
    for a in range(k):
        for b in range(k):
            if a != b:
                interhub += haversine_km(centroids[a], centroids[b])
    intra = 0.0
    cluster_demand = []
    for c, mem in enumerate(members):
        intra += sum(haversine_km(centroids[c], points[i].pos) for i in mem)
        cluster_demand.append(sum(points[i].demand(demand) for i in mem))

    dem = np.array(cluster_demand)
    mean = dem.mean()
    cv = float(dem.std() / mean) if mean > 0 else 0.0
    return DesignMetrics(
        approx_cost_km=interhub + intra,
        interhub_km=interhub,
        intracluster_km=intra,
        cluster_demand=tuple(cluster_demand),
        demand_cv=cv,
        cluster_sizes=tuple(len(m) for m in members),
    )


def center_of_gravity(points: Sequence[DemandPoint], demand: str = "delivery",
                      zero_demand: str = "error") -> GeoPoint:
    """Demand-weighted mean position of one cluster's points."""
    if not points:
        raise DesignError("empty cluster")
    weights = [p.demand(demand) for p in points]
    total = sum(weights)
    if total <= 0:
        if zero_demand == "mean":
            lat = sum(p.pos.lat for p in points) / len(points)
            lon = sum(p.pos.lon for p in points) / len(points)
            return GeoPoint(lat, lon)
        raise DesignError("zero-demand cluster (set gravity_zero_demand: mean to fall back)")
    lat = sum(w * p.pos.lat for w, p in zip(weights, points)) / total
    lon = sum(w * p.pos.lon for w, p in zip(weights, points)) / total
    return GeoPoint(lat, lon)


def place_hubs(points: Sequence[DemandPoint], assignment: Sequence[int],
               demand: str = "delivery", zero_demand: str = "error") -> list[GeoPoint]:
    """One center-of-gravity hub per cluster, in cluster-index order."""
    k = max(assignment) + 1
    members = _clusters_of(assignment, k)
    return [center_of_gravity([points[i] for i in mem], demand, zero_demand)
            for mem in members]


def crisp_means(points: Sequence[DemandPoint], assignment: Sequence[int],
                k: int) -> list[GeoPoint]:
    """Unweighted per-cluster coordinate means (centroids after expert edits)."""
    members = _clusters_of(assignment, k)
    out = []
    for mem in members:
        lat = sum(points[i].pos.lat for i in mem) / len(mem)
        lon = sum(points[i].pos.lon for i in mem) / len(mem)
        out.append(GeoPoint(lat, lon))
    return out
