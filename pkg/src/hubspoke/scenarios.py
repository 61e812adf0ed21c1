"""Expand a network design + parcel set into the four flow-distribution
scenarios and their routing sub-problems.

S0: spoke -> central DC -> spoke. S1: spoke -> hub -> DC -> hub -> spoke
(hubs consolidate only; the DC sorts). S2: spoke -> hub -> hub -> spoke
(hubs sort; intra-cluster parcels never leave their hub). S3: as S2, but
spokes within the hand-off radius collect at the hub, so only far spokes
get last-mile service.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

from .config import AppConfig
from .geo import GeoPoint, build_matrix, haversine_km
from .model import FleetSpec, Instance, NetworkDesign
from .vrptw import Budget, RoutePlan, Stop, VrptwProblem, solve


class ScenarioError(ValueError):
    pass


class ScenarioId(str, Enum):
    S0 = "S0"
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"


@dataclass(frozen=True)
class SubProblem:
    """One first- or last-mile VRPTW leg anchored at a facility."""

    name: str
    kind: str  # "first_mile" | "last_mile"
    facility: GeoPoint
    problem: VrptwProblem
    parcel_ids: tuple[str, ...]


@dataclass(frozen=True)
class LinehaulLoad:
    from_label: str
    to_label: str
    from_facility: GeoPoint
    to_facility: GeoPoint
    parcel_units: float
    trucks_needed: int
    distance_km: float
    parcel_ids: tuple[str, ...]


@dataclass(frozen=True)
class ScenarioPlan:
    scenario: ScenarioId
    first_mile: tuple[SubProblem, ...]
    line_haul: tuple[LinehaulLoad, ...]
    last_mile: tuple[SubProblem, ...]
    handoff_parcels: frozenset[str]
    parcel_paths: dict[str, tuple[str, ...]]
    cost_attribution: str = "pickup=first_mile+line_haul; delivery=last_mile"


def _facility_matrix_problem(name: str, kind: str, facility: GeoPoint,
                             stop_units: dict[str, float],
                             parcel_ids: list[str],
                             instance: Instance, cfg: AppConfig) -> SubProblem:
    """Build one VRPTW over the spokes touching this facility.

    Aggregated units above truck capacity are split into capacity-sized
    chunks so every stop respects the per-stop demand bound.
    """
    idx = instance.point_index()
    fleet = instance.fleet
    stops: list[Stop] = []
    locations: list[GeoPoint] = [facility]
    for pid in sorted(stop_units):
        units = stop_units[pid]
        pos = idx[pid].pos
        chunk_no = 0
        while units > 1e-12:
            chunk = min(units, fleet.truck_capacity)
            label = pid if chunk_no == 0 else f"{pid}#{chunk_no}"
            stops.append(Stop(label=label, demand=chunk,
                              tw_early=fleet.shift_start_min, tw_late=fleet.shift_end_min,
                              service_min=0.0, location=pos))
            locations.append(pos)
            units -= chunk
            chunk_no += 1
    matrix = build_matrix(locations, speed_kmh=cfg.speed_kmh, detour_factor=cfg.detour_factor)
    problem = VrptwProblem(stops=tuple(stops), matrix=matrix,
                           capacity=fleet.truck_capacity,
                           fixed_cost=fleet.truck_fixed_cost,
                           cost_per_km=fleet.cost_per_km,
                           depot_early=fleet.shift_start_min,
                           depot_late=fleet.shift_end_min,
                           depot=facility)
    return SubProblem(name=name, kind=kind, facility=facility,
                      problem=problem, parcel_ids=tuple(parcel_ids))


def _linehaul(from_label: str, to_label: str, a: GeoPoint, b: GeoPoint,
              parcels: list, capacity: float, cfg: AppConfig) -> LinehaulLoad:
    units = sum(p.size for p in parcels)
    return LinehaulLoad(
        from_label=from_label, to_label=to_label, from_facility=a, to_facility=b,
        parcel_units=units,
        trucks_needed=0 if units == 0 else math.ceil(units / capacity - 1e-12),
        distance_km=haversine_km(a, b) * cfg.detour_factor,
        parcel_ids=tuple(p.id for p in parcels),
    )


def expand(design: NetworkDesign, instance: Instance, scenario: ScenarioId | str,
           config: AppConfig | None = None) -> ScenarioPlan:
    """Expand one scenario into first-mile, line-haul, and last-mile pieces."""
    scenario = ScenarioId(scenario)
    cfg = config or AppConfig()
    idx = instance.point_index()
    for pid in idx:
        if pid not in design.assignment:
            raise ScenarioError(f"design does not cover point {pid}")
    cluster_of = design.assignment
    hubs = design.hubs
    cap = instance.fleet.truck_capacity
    dc = instance.depot
    if dc is None and scenario in (ScenarioId.S0, ScenarioId.S1):
        raise ScenarioError(f"{scenario.value} requires a configured central DC")

    paths: dict[str, tuple[str, ...]] = {}
    first: list[SubProblem] = []
    last: list[SubProblem] = []
    loads: list[LinehaulLoad] = []
    handoff: set[str] = set()

    def hub_label(c: int) -> str:
        return f"hub{c}"

    if scenario is ScenarioId.S0:
        origin_units: dict[str, float] = defaultdict(float)
        dest_units: dict[str, float] = defaultdict(float)
        for p in instance.parcels:
            origin_units[p.origin] += p.size
            dest_units[p.dest] += p.size
            paths[p.id] = (p.origin, "DC", p.dest)
        pids = [p.id for p in instance.parcels]
        first.append(_facility_matrix_problem("S0:first_mile:DC", "first_mile", dc,
                                              dict(origin_units), pids, instance, cfg))
        last.append(_facility_matrix_problem("S0:last_mile:DC", "last_mile", dc,
                                             dict(dest_units), pids, instance, cfg))
    else:
        # per-hub first-mile consolidation is shared by S1/S2/S3
        origin_by_hub: dict[int, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        dest_by_hub: dict[int, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        fm_parcels: dict[int, list[str]] = defaultdict(list)
        lm_parcels: dict[int, list[str]] = defaultdict(list)
        for p in instance.parcels:
            co, cd = cluster_of[p.origin], cluster_of[p.dest]
            origin_by_hub[co][p.origin] += p.size
            fm_parcels[co].append(p.id)
            if scenario is ScenarioId.S1:
                paths[p.id] = (p.origin, hub_label(co), "DC", hub_label(cd), p.dest)
            elif co == cd:
                paths[p.id] = (p.origin, hub_label(co), p.dest)
            else:
                paths[p.id] = (p.origin, hub_label(co), hub_label(cd), p.dest)

            serve_last_mile = True
            if scenario is ScenarioId.S3:
                dist = haversine_km(hubs[cd], idx[p.dest].pos)
                if dist <= cfg.handoff_radius_km:
                    serve_last_mile = False
                    handoff.add(p.id)
                    paths[p.id] = paths[p.id][:-1] + (hub_label(cd) + ":handoff",)
            if serve_last_mile:
                dest_by_hub[cd][p.dest] += p.size
                lm_parcels[cd].append(p.id)

        for c in range(design.k):
            if origin_by_hub[c]:
                first.append(_facility_matrix_problem(
                    f"{scenario.value}:first_mile:{hub_label(c)}", "first_mile",
                    hubs[c], dict(origin_by_hub[c]), fm_parcels[c], instance, cfg))
            if dest_by_hub[c]:
                last.append(_facility_matrix_problem(
                    f"{scenario.value}:last_mile:{hub_label(c)}", "last_mile",
                    hubs[c], dict(dest_by_hub[c]), lm_parcels[c], instance, cfg))

        if scenario is ScenarioId.S1:
            # every parcel rides hub -> DC then DC -> destination hub
            to_dc: dict[int, list] = defaultdict(list)
            from_dc: dict[int, list] = defaultdict(list)
            for p in instance.parcels:
                to_dc[cluster_of[p.origin]].append(p)
                from_dc[cluster_of[p.dest]].append(p)
            for c in range(design.k):
                if to_dc[c]:
                    loads.append(_linehaul(hub_label(c), "DC", hubs[c], dc, to_dc[c], cap, cfg))
                if from_dc[c]:
                    loads.append(_linehaul("DC", hub_label(c), dc, hubs[c], from_dc[c], cap, cfg))
        else:
            # S2/S3: direct hub -> hub for cross-cluster parcels only
            pair: dict[tuple[int, int], list] = defaultdict(list)
            for p in instance.parcels:
                co, cd = cluster_of[p.origin], cluster_of[p.dest]
                if co != cd:
                    pair[(co, cd)].append(p)
            for (co, cd) in sorted(pair):
                loads.append(_linehaul(hub_label(co), hub_label(cd),
                                       hubs[co], hubs[cd], pair[(co, cd)], cap, cfg))

    return ScenarioPlan(scenario=scenario, first_mile=tuple(first),
                        line_haul=tuple(loads), last_mile=tuple(last),
                        handoff_parcels=frozenset(handoff), parcel_paths=paths)


def linehaul_cost(loads, fleet: FleetSpec, roundtrip: bool = False) -> float:
    """Dedicated-truck line-haul pricing: trucks x (fixed + km x rate)."""
    mult = 2.0 if roundtrip else 1.0
    return sum(ld.trucks_needed * (fleet.truck_fixed_cost + mult * ld.distance_km * fleet.cost_per_km)
               for ld in loads)


def linehaul_trucks(loads) -> int:
    return sum(ld.trucks_needed for ld in loads)


@dataclass(frozen=True)
class ScenarioResult:
    """A fully priced scenario: solved legs plus the cost buckets."""

    scenario: ScenarioId
    first_mile_plans: tuple[RoutePlan, ...]
    last_mile_plans: tuple[RoutePlan, ...]
    pickup_cost: float
    delivery_cost: float
    total_cost: float
    trucks_used: int
    plan: ScenarioPlan

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario.value,
            "trucks_used": self.trucks_used,
            "total_cost": self.total_cost,
            "pickup_cost": self.pickup_cost,
            "delivery_cost": self.delivery_cost,
            "first_mile": [p.to_json() for p in self.first_mile_plans],
            "last_mile": [p.to_json() for p in self.last_mile_plans],
            "line_haul": [
                {"from": ld.from_label, "to": ld.to_label, "parcel_units": ld.parcel_units,
                 "trucks_needed": ld.trucks_needed, "distance_km": ld.distance_km}
                for ld in self.plan.line_haul
            ],
            "handoff_parcels": sorted(self.plan.handoff_parcels),
            "cost_attribution": self.plan.cost_attribution,
        }


def solve_scenario(plan: ScenarioPlan, instance: Instance,
                   config: AppConfig | None = None,
                   budget: Budget = Budget(), seed: int = 0,
                   jobs: int = 1) -> ScenarioResult:
    """Solve every routing leg and attribute costs to pickup/delivery buckets."""
    cfg = config or AppConfig()
    fleet = instance.fleet

    subproblems = list(plan.first_mile) + list(plan.last_mile)
    if jobs > 1 and len(subproblems) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(lambda sp: solve(sp.problem, budget, seed), subproblems))
    else:
        solved = [solve(sp.problem, budget, seed) for sp in subproblems]
    fm = tuple(solved[:len(plan.first_mile)])
    lm = tuple(solved[len(plan.first_mile):])

    lh_cost = linehaul_cost(plan.line_haul, fleet, roundtrip=cfg.linehaul_roundtrip)
    pickup = sum(p.total_cost for p in fm) + lh_cost
    delivery = sum(p.total_cost for p in lm)
    trucks = sum(p.trucks_used for p in fm) + sum(p.trucks_used for p in lm) \
        + linehaul_trucks(plan.line_haul)
    return ScenarioResult(scenario=plan.scenario, first_mile_plans=fm, last_mile_plans=lm,
                          pickup_cost=pickup, delivery_cost=delivery,
                          total_cost=pickup + delivery, trucks_used=trucks, plan=plan)
