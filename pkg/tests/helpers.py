"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from hubspoke.geo import GeoPoint, TravelMatrix
from hubspoke.model import DemandPoint
from hubspoke.vrptw import Stop, VrptwProblem

SHIFT_END = 600.0


def planar_matrix(xy: np.ndarray) -> TravelMatrix:
    d = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    d = (d + d.T) / 2.0
    return TravelMatrix(distance_km=d, duration_min=d / 25.0 * 60.0)


def random_vrptw(rng: np.random.Generator, n: int, capacity: float = 20.0,
                 fixed: float = 50.0, span_km: float = 20.0,
                 tight_windows: bool = True) -> VrptwProblem:
    xy = rng.random((n + 1, 2)) * span_km
    stops = []
    for i in range(n):
        if tight_windows:
            e = float(rng.uniform(0, 300))
            l = float(min(rng.uniform(e + 60, SHIFT_END), SHIFT_END))
        else:
            e, l = 0.0, SHIFT_END
        stops.append(Stop(label=f"s{i}", demand=float(rng.integers(1, 10)),
                          tw_early=e, tw_late=l, service_min=5.0))
    return VrptwProblem(stops=tuple(stops), matrix=planar_matrix(xy),
                        capacity=capacity, fixed_cost=fixed, cost_per_km=1.0,
                        depot_early=0.0, depot_late=SHIFT_END)


def demand_point(pid: str, lat: float, lon: float, pickup: float = 1.0,
                 delivery: float = 1.0) -> DemandPoint:
    return DemandPoint(id=pid, pos=GeoPoint(lat, lon),
                       pickup_demand=pickup, delivery_demand=delivery)
