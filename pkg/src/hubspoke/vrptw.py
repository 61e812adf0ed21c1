"""Capacitated vehicle routing with time windows.

Construction by Clarke-Wright savings with time-window feasibility checks,
improvement by first-improvement local search (relocate, swap, 2-opt*,
intra-route 2-opt), plus an independent validator and an exhaustive
small-instance oracle.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geo import GeoPoint, TravelMatrix

_EPS = 1e-9


class VrptwError(ValueError):
    pass


class InfeasibleError(VrptwError):
    """A stop cannot be served even by a dedicated truck."""


@dataclass(frozen=True)
class Stop:
    label: str
    demand: float
    tw_early: float
    tw_late: float
    service_min: float = 0.0
    location: GeoPoint | None = None

    def __post_init__(self) -> None:
        if self.demand < 0:
            raise VrptwError(f"stop {self.label}: negative demand")
        if self.tw_early > self.tw_late:
            raise VrptwError(f"stop {self.label}: window earliest > latest")
        if self.service_min < 0:
            raise VrptwError(f"stop {self.label}: negative service time")


@dataclass(frozen=True)
class VrptwProblem:
    """Depot + stops with a travel matrix (index 0 = depot, i+1 = stops[i])."""

    stops: tuple[Stop, ...]
    matrix: TravelMatrix
    capacity: float
    fixed_cost: float
    cost_per_km: float
    depot_early: float
    depot_late: float
    depot: GeoPoint | None = None

    def __post_init__(self) -> None:
        if self.matrix.n != len(self.stops) + 1:
            raise VrptwError("matrix size must be len(stops)+1")
        if self.capacity <= 0:
            raise VrptwError("capacity must be positive")
        if self.depot_late <= self.depot_early:
            raise VrptwError("depot window empty")
        for s in self.stops:
            if s.demand > self.capacity + _EPS:
                raise VrptwError(f"stop {s.label}: demand {s.demand} exceeds capacity")
            if s.tw_late > self.depot_late + _EPS or s.tw_early < self.depot_early - _EPS:
                raise VrptwError(f"stop {s.label}: window outside shift")

    @property
    def n(self) -> int:
        return len(self.stops)

    def to_json(self) -> dict:
        return {
            "stops": [
                {"label": s.label, "demand": s.demand, "tw_early": s.tw_early,
                 "tw_late": s.tw_late, "service_min": s.service_min,
                 "location": None if s.location is None
                             else {"lat": s.location.lat, "lon": s.location.lon}}
                for s in self.stops
            ],
            "distance_km": self.matrix.distance_km.tolist(),
            "duration_min": self.matrix.duration_min.tolist(),
            "capacity": self.capacity,
            "fixed_cost": self.fixed_cost,
            "cost_per_km": self.cost_per_km,
            "depot_early": self.depot_early,
            "depot_late": self.depot_late,
            "depot": None if self.depot is None else {"lat": self.depot.lat, "lon": self.depot.lon},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "VrptwProblem":
        stops = tuple(
            Stop(label=s["label"], demand=s["demand"], tw_early=s["tw_early"],
                 tw_late=s["tw_late"], service_min=s.get("service_min", 0.0),
                 location=None if s.get("location") is None
                          else GeoPoint(s["location"]["lat"], s["location"]["lon"]))
            for s in doc["stops"]
        )
        matrix = TravelMatrix(np.array(doc["distance_km"], dtype=float),
                              np.array(doc["duration_min"], dtype=float))
        depot = None if doc.get("depot") is None else GeoPoint(doc["depot"]["lat"], doc["depot"]["lon"])
        return cls(stops=stops, matrix=matrix, capacity=doc["capacity"],
                   fixed_cost=doc["fixed_cost"], cost_per_km=doc["cost_per_km"],
                   depot_early=doc["depot_early"], depot_late=doc["depot_late"], depot=depot)


@dataclass(frozen=True)
class Route:
    stops: tuple[int, ...]  # indices into problem.stops
    arrivals: tuple[float, ...]  # service start time at each stop
    load: float
    distance_km: float


@dataclass(frozen=True)
class RoutePlan:
    routes: tuple[Route, ...]
    trucks_used: int
    total_km: float
    total_cost: float
    feasible: bool

    def to_json(self, problem: VrptwProblem | None = None) -> dict:
        return {
            "routes": [
                {"stops": [problem.stops[i].label if problem else i for i in r.stops],
                 "stop_indices": list(r.stops),
                 "arrivals": list(r.arrivals),
                 "load": r.load, "distance_km": r.distance_km}
                for r in self.routes
            ],
            "trucks_used": self.trucks_used,
            "total_km": self.total_km,
            "total_cost": self.total_cost,
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class Budget:
    max_seconds: float = 5.0
    max_iters: int = 50_000


def _evaluate(problem: VrptwProblem, seq: tuple[int, ...] | list[int]):
    """Simulate one route; return (feasible, distance_km, arrivals, load)."""
    D = problem.matrix.distance_km
    T = problem.matrix.duration_min
    t = problem.depot_early
    prev = 0
    dist = 0.0
    load = 0.0
    arrivals = []
    for s in seq:
        node = s + 1
        dist += D[prev, node]
        t += T[prev, node]
        st = problem.stops[s]
        if t < st.tw_early:
            t = st.tw_early
        if t > st.tw_late + _EPS:
            return False, dist, arrivals, load
        arrivals.append(t)
        t += st.service_min
        load += st.demand
        prev = node
    dist += D[prev, 0]
    t += T[prev, 0]
    if t > problem.depot_late + _EPS:
        return False, dist, arrivals, load
    if load > problem.capacity + _EPS:
        return False, dist, arrivals, load
    return True, dist, arrivals, load


def _plan_cost(problem: VrptwProblem, routes: list[list[int]]) -> tuple[float, float]:
    km = 0.0
    used = 0
    for r in routes:
        if not r:
            continue
        used += 1
        _, d, _, _ = _evaluate(problem, r)
        km += d
    return km, used * problem.fixed_cost + km * problem.cost_per_km


def _route_km(problem: VrptwProblem, seq: list[int]) -> float:
    D = problem.matrix.distance_km
    prev = 0
    dist = 0.0
    for s in seq:
        dist += D[prev, s + 1]
        prev = s + 1
    return dist + D[prev, 0]


def _make_plan(problem: VrptwProblem, routes: list[list[int]]) -> RoutePlan:
    built = []
    km = 0.0
    for r in routes:
        if not r:
            continue
        ok, d, arrivals, load = _evaluate(problem, r)
        if not ok:
            raise VrptwError("internal error: infeasible route in final plan")
        built.append(Route(stops=tuple(r), arrivals=tuple(arrivals), load=load, distance_km=d))
        km += d
    cost = len(built) * problem.fixed_cost + km * problem.cost_per_km
    return RoutePlan(routes=tuple(built), trucks_used=len(built),
                     total_km=km, total_cost=cost, feasible=True)


def _savings_construct(problem: VrptwProblem) -> list[list[int]]:
    n = problem.n
    D = problem.matrix.distance_km
    routes: list[list[int]] = [[i] for i in range(n)]
    route_of = list(range(n))
    savings = []
    for i in range(n):
        for j in range(n):
            if i != j:
                s = D[0, i + 1] + D[0, j + 1] - D[i + 1, j + 1]
                savings.append((s, i, j))
    savings.sort(key=lambda t: (-t[0], t[1], t[2]))
    loads = [problem.stops[i].demand for i in range(n)]
    for s, i, j in savings:
        ri, rj = route_of[i], route_of[j]
        if ri == rj or not routes[ri] or not routes[rj]:
            continue
        if routes[ri][-1] != i or routes[rj][0] != j:
            continue
        if loads[ri] + loads[rj] > problem.capacity + _EPS:
            continue
        merged = routes[ri] + routes[rj]
        ok, _, _, _ = _evaluate(problem, merged)
        if not ok:
            continue
        routes[ri] = merged
        loads[ri] += loads[rj]
        routes[rj] = []
        for stop in merged:
            route_of[stop] = ri
    routes = [r for r in routes if r]

    # cheapest-feasible-insertion pass: absorb remaining singletons
    singles = [r for r in routes if len(r) == 1]
    others = [r for r in routes if len(r) > 1]
    for single in singles:
        s = single[0]
        best = None
        for r in others:
            for pos in range(len(r) + 1):
                cand = r[:pos] + [s] + r[pos:]
                ok, d, _, _ = _evaluate(problem, cand)
                if ok:
                    delta = d - _route_km(problem, r)
                    if best is None or delta < best[0]:
                        best = (delta, r, pos)
        if best is not None and best[0] < problem.fixed_cost + 2 * problem.matrix.distance_km[0, s + 1] * problem.cost_per_km:
            _, r, pos = best
            r.insert(pos, s)
        else:
            others.append(single)
    return others


def _insertion_construct(problem: VrptwProblem, order: list[int]) -> list[list[int]]:
    """Sequential cheapest feasible insertion in the given stop order."""
    routes: list[list[int]] = []
    for s in order:
        best = None
        for r in routes:
            base = _route_km(problem, r)
            for pos in range(len(r) + 1):
                cand = r[:pos] + [s] + r[pos:]
                ok, d, _, _ = _evaluate(problem, cand)
                if ok:
                    delta = d - base
                    if best is None or delta < best[0]:
                        best = (delta, r, pos)
        single_cost = problem.fixed_cost + 2 * problem.matrix.distance_km[0, s + 1] * problem.cost_per_km
        if best is not None and best[0] * problem.cost_per_km < single_cost:
            _, r, pos = best
            r.insert(pos, s)
        else:
            routes.append([s])
    return routes


class _SearchBudget:
    def __init__(self, budget: Budget) -> None:
        self.deadline = time.monotonic() + budget.max_seconds
        self.remaining = budget.max_iters

    def tick(self) -> bool:
        self.remaining -= 1
        if self.remaining <= 0:
            return False
        if self.remaining % 512 == 0 and time.monotonic() > self.deadline:
            return False
        return True


def _local_search(problem: VrptwProblem, routes: list[list[int]], budget: Budget) -> list[list[int]]:
    guard = _SearchBudget(budget)
    fixed, per_km = problem.fixed_cost, problem.cost_per_km

    def route_cost(r: list[int]) -> float:
        return 0.0 if not r else fixed + _route_km(problem, r) * per_km

    improved = True
    while improved:
        improved = False

        # relocate: move one stop to any position in any route
        for a in range(len(routes)):
            ra = routes[a]
            for pi in range(len(ra)):
                s = ra[pi]
                base_a = route_cost(ra)
                removed = ra[:pi] + ra[pi + 1:]
                ok_a, _, _, _ = _evaluate(problem, removed) if removed else (True, 0, [], 0)
                if not ok_a:
                    continue
                gain_a = base_a - route_cost(removed)
                for b in range(len(routes)):
                    if b == a:
                        continue
                    rb = routes[b]
                    base_b = route_cost(rb)
                    for pos in range(len(rb) + 1):
                        if not guard.tick():
                            return [r for r in routes if r]
                        cand = rb[:pos] + [s] + rb[pos:]
                        ok, _, _, _ = _evaluate(problem, cand)
                        if not ok:
                            continue
                        delta = (route_cost(cand) - base_b) - gain_a
                        if delta < -_EPS:
                            routes[a] = removed
                            routes[b] = cand
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            routes = [r for r in routes if r]
            continue

        # swap: exchange two stops between routes
        for a in range(len(routes)):
            for b in range(a + 1, len(routes)):
                ra, rb = routes[a], routes[b]
                ca, cb = route_cost(ra), route_cost(rb)
                for pi in range(len(ra)):
                    for pj in range(len(rb)):
                        if not guard.tick():
                            return [r for r in routes if r]
                        na = ra[:pi] + [rb[pj]] + ra[pi + 1:]
                        nb = rb[:pj] + [ra[pi]] + rb[pj + 1:]
                        ok1, _, _, _ = _evaluate(problem, na)
                        if not ok1:
                            continue
                        ok2, _, _, _ = _evaluate(problem, nb)
                        if not ok2:
                            continue
                        if route_cost(na) + route_cost(nb) < ca + cb - _EPS:
                            routes[a], routes[b] = na, nb
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            continue

        # 2-opt*: exchange route tails
        for a in range(len(routes)):
            for b in range(a + 1, len(routes)):
                ra, rb = routes[a], routes[b]
                ca, cb = route_cost(ra), route_cost(rb)
                for pi in range(len(ra) + 1):
                    for pj in range(len(rb) + 1):
                        if pi == len(ra) and pj == len(rb):
                            continue
                        if not guard.tick():
                            return [r for r in routes if r]
                        na = ra[:pi] + rb[pj:]
                        nb = rb[:pj] + ra[pi:]
                        ok1, _, _, _ = _evaluate(problem, na) if na else (True, 0, [], 0)
                        if not ok1:
                            continue
                        ok2, _, _, _ = _evaluate(problem, nb) if nb else (True, 0, [], 0)
                        if not ok2:
                            continue
                        if route_cost(na) + route_cost(nb) < ca + cb - _EPS:
                            routes[a], routes[b] = na, nb
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            routes = [r for r in routes if r]
            continue

        # intra-route 2-opt: reverse a segment
        for a in range(len(routes)):
            ra = routes[a]
            base = _route_km(problem, ra)
            for i in range(len(ra) - 1):
                for j in range(i + 1, len(ra)):
                    if not guard.tick():
                        return [r for r in routes if r]
                    cand = ra[:i] + ra[i:j + 1][::-1] + ra[j + 1:]
                    ok, d, _, _ = _evaluate(problem, cand)
                    if ok and d < base - _EPS:
                        routes[a] = cand
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break

    return [r for r in routes if r]


def solve(problem: VrptwProblem, budget: Budget = Budget(), seed: int = 0) -> RoutePlan:
    """Heuristic solve: savings construction then local-search improvement.

    Deterministic for a fixed seed and budget. Raises InfeasibleError when
    some stop cannot be served even by a dedicated truck.
    """
    bad = [problem.stops[i].label for i in range(problem.n)
           if not _evaluate(problem, [i])[0]]
    if bad:
        raise InfeasibleError(f"stops unreachable within their windows: {', '.join(bad)}")
    if problem.n == 0:
        return RoutePlan(routes=(), trucks_used=0, total_km=0.0, total_cost=0.0, feasible=True)

    rng = np.random.default_rng(seed)
    starts: list[list[list[int]]] = [_savings_construct(problem)]
    by_window = sorted(range(problem.n), key=lambda i: (problem.stops[i].tw_late,
                                                        problem.stops[i].tw_early))
    starts.append(_insertion_construct(problem, by_window))
    restarts = 3 if problem.n <= 30 else 1
    for _ in range(restarts):
        order = list(rng.permutation(problem.n))
        starts.append(_insertion_construct(problem, [int(i) for i in order]))

    deadline = time.monotonic() + budget.max_seconds
    share = Budget(max_seconds=budget.max_seconds / len(starts),
                   max_iters=max(1, budget.max_iters // len(starts)))
    best: list[list[int]] | None = None
    best_cost = math.inf
    for routes in starts:
        routes = _local_search(problem, routes, share)
        _, cost = _plan_cost(problem, routes)
        if cost < best_cost - _EPS:
            best, best_cost = routes, cost
        if time.monotonic() > deadline:
            break
    assert best is not None
    return _make_plan(problem, best)


def validate(problem: VrptwProblem, plan: RoutePlan) -> list[str]:
    """Independent recheck of coverage, capacity, and timing; returns violations."""
    violations: list[str] = []
    seen: dict[int, int] = {}
    for ri, route in enumerate(plan.routes):
        for s in route.stops:
            seen[s] = seen.get(s, 0) + 1
    for i in range(problem.n):
        c = seen.get(i, 0)
        if c == 0:
            violations.append(f"stop {problem.stops[i].label} not visited")
        elif c > 1:
            violations.append(f"duplicate stop {problem.stops[i].label} (visited {c} times)")
    for s in seen:
        if s < 0 or s >= problem.n:
            violations.append(f"unknown stop index {s}")
    for ri, route in enumerate(plan.routes):
        if any(s < 0 or s >= problem.n for s in route.stops):
            continue
        load = sum(problem.stops[s].demand for s in route.stops)
        if load > problem.capacity + _EPS:
            violations.append(f"route {ri}: capacity exceeded ({load} > {problem.capacity})")
        ok, _, _, _ = _evaluate(problem, list(route.stops))
        if not ok:
            violations.append(f"route {ri}: time-window or shift violation")
    km = sum(_route_km(problem, list(r.stops)) for r in plan.routes)
    expected = plan.trucks_used * problem.fixed_cost + km * problem.cost_per_km
    if abs(expected - plan.total_cost) > 1e-6:
        violations.append(f"cost mismatch: stated {plan.total_cost}, recomputed {expected}")
    return violations


def brute_force(problem: VrptwProblem) -> RoutePlan:
    """Exhaustive optimum over all stop partitions and orderings (<= 8 stops)."""
    n = problem.n
    if n > 8:
        raise VrptwError("brute force refused for more than 8 stops")
    bad = [problem.stops[i].label for i in range(n) if not _evaluate(problem, [i])[0]]
    if bad:
        raise InfeasibleError(f"stops unreachable within their windows: {', '.join(bad)}")
    if n == 0:
        return RoutePlan(routes=(), trucks_used=0, total_km=0.0, total_cost=0.0, feasible=True)

    INF = math.inf
    best_route_cost = [INF] * (1 << n)
    best_route_seq: list[tuple[int, ...] | None] = [None] * (1 << n)
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if sum(problem.stops[i].demand for i in members) > problem.capacity + _EPS:
            continue
        for perm in itertools.permutations(members):
            ok, d, _, _ = _evaluate(problem, perm)
            if ok:
                cost = problem.fixed_cost + d * problem.cost_per_km
                if cost < best_route_cost[mask]:
                    best_route_cost[mask] = cost
                    best_route_seq[mask] = perm

    dp = [INF] * (1 << n)
    choice: list[int] = [0] * (1 << n)
    dp[0] = 0.0
    for mask in range(1, 1 << n):
        low = mask & -mask
        sub = mask
        while sub:
            if sub & low and best_route_cost[sub] < INF:
                cand = dp[mask ^ sub] + best_route_cost[sub]
                if cand < dp[mask]:
                    dp[mask] = cand
                    choice[mask] = sub
            sub = (sub - 1) & mask
    full = (1 << n) - 1
    if dp[full] == INF:
        raise InfeasibleError("no feasible partition exists")
    routes: list[list[int]] = []
    mask = full
    while mask:
        sub = choice[mask]
        routes.append(list(best_route_seq[sub]))  # type: ignore[arg-type]
        mask ^= sub
    return _make_plan(problem, routes)
