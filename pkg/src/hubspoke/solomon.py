"""Solomon benchmark format import/export for cross-checking the solver
against published VRPTW instances.

Imported instances are planar: the travel matrix is Euclidean on the file's
x/y coordinates and travel time equals distance, as in the benchmark.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .geo import GeoPoint, TravelMatrix
from .vrptw import Stop, VrptwProblem


def parse_solomon(text: str, fixed_cost: float = 0.0, cost_per_km: float = 1.0) -> VrptwProblem:
    """Parse Solomon text (NAME / VEHICLE / CUSTOMER sections)."""
    lines = [ln.strip() for ln in text.splitlines()]
    capacity = None
    rows: list[list[float]] = []
    in_customers = False
    for ln in lines:
        if not ln:
            continue
        upper = ln.upper()
        if upper.startswith("CUST"):
            in_customers = True
            continue
        parts = ln.split()
        if not in_customers:
            if len(parts) == 2 and all(p.lstrip("-").isdigit() for p in parts):
                capacity = float(parts[1])  # "vehicle_count capacity" line
            continue
        if len(parts) >= 7:
            rows.append([float(x) for x in parts[:7]])
    if capacity is None:
        raise ValueError("missing VEHICLE capacity line")
    if not rows:
        raise ValueError("no customer rows found")
    rows.sort(key=lambda r: r[0])
    coords = np.array([[r[1], r[2]] for r in rows])
    dist = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(dist, 0.0)
    dist = (dist + dist.T) / 2.0
    matrix = TravelMatrix(distance_km=dist, duration_min=dist.copy())
    depot_row = rows[0]
    stops = tuple(
        Stop(label=str(int(r[0])), demand=r[3], tw_early=r[4], tw_late=r[5],
             service_min=r[6], location=None)
        for r in rows[1:]
    )
    return VrptwProblem(stops=stops, matrix=matrix, capacity=capacity,
                        fixed_cost=fixed_cost, cost_per_km=cost_per_km,
                        depot_early=depot_row[4], depot_late=depot_row[5], depot=None)


def _project_planar(points: list[GeoPoint]) -> np.ndarray:
    """Equirectangular projection to km around the centroid; adequate at
    city scale."""
    lat0 = sum(p.lat for p in points) / len(points)
    lon0 = sum(p.lon for p in points) / len(points)
    k = 111.32  # km per degree latitude
    out = np.array([
        [(p.lon - lon0) * k * math.cos(math.radians(lat0)), (p.lat - lat0) * k]
        for p in points
    ])
    return out - out.min(axis=0)  # benchmark files use non-negative coords


def write_solomon(problem: VrptwProblem, name: str = "HUBSPOKE",
                  vehicles: int = 25) -> str:
    """Render a geographic problem in Solomon layout (planar projection)."""
    locs = [problem.depot] + [s.location for s in problem.stops]
    if any(l is None for l in locs):
        raise ValueError("cannot export: problem lacks geographic locations")
    xy = _project_planar(locs)  # type: ignore[arg-type]
    lines = [name, "", "VEHICLE", "NUMBER     CAPACITY",
             f"  {vehicles}         {problem.capacity:g}", "", "CUSTOMER",
             "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME", ""]

    def row(i: int, x: float, y: float, dem: float, e: float, l: float, svc: float) -> str:
        return f"{i:>5}{x:>11.3f}{y:>11.3f}{dem:>10.3f}{e:>12.3f}{l:>11.3f}{svc:>13.3f}"

    lines.append(row(0, xy[0, 0], xy[0, 1], 0.0, problem.depot_early, problem.depot_late, 0.0))
    for i, s in enumerate(problem.stops, start=1):
        lines.append(row(i, xy[i, 0], xy[i, 1], s.demand, s.tw_early, s.tw_late, s.service_min))
    return "\n".join(lines) + "\n"


def load_solomon(path: str | Path, **kw) -> VrptwProblem:
    return parse_solomon(Path(path).read_text(), **kw)
