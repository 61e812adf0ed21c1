"""Expert-in-the-loop cluster reassignment: editable state, suggestions,
undo/redo, and live metric recomputation.

Metrics use crisp per-cluster coordinate means as centroids, kept
incrementally in sync as points move.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import netdesign
from .fcm import FuzzyClustering, crisp_assignment
from .geo import GeoPoint, haversine_km
from .model import DemandPoint, NetworkDesign
from .netdesign import DesignMetrics


class SessionError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    point_id: str
    from_cluster: int
    to_cluster: int
    timestamp: float
    actor: str

    def __post_init__(self) -> None:
        if self.from_cluster == self.to_cluster:
            raise SessionError("no-op move")


@dataclass(frozen=True)
class Suggestion:
    point_id: str
    membership: float
    demand: float
    delta_cost: float


class _ClusterState:
    """Running sums backing O(cluster) metric updates after each move."""

    def __init__(self, points: Sequence[DemandPoint], labels: Sequence[int], k: int,
                 demand: str) -> None:
        self.k = k
        self.demand = demand
        self.members: list[set[int]] = [set() for _ in range(k)]
        self.coord_sum = np.zeros((k, 2))
        self.demand_sum = np.zeros(k)
        self._pts = points
        for i, c in enumerate(labels):
            self.members[c].add(i)
            self.coord_sum[c] += (points[i].pos.lat, points[i].pos.lon)
            self.demand_sum[c] += points[i].demand(demand)
        self.intra = np.array([self._intra_term(c) for c in range(k)])

    def mean(self, c: int) -> GeoPoint:
        n = len(self.members[c])
        return GeoPoint(self.coord_sum[c, 0] / n, self.coord_sum[c, 1] / n)

    def _intra_term(self, c: int) -> float:
        m = self.mean(c)
        return sum(haversine_km(m, self._pts[i].pos) for i in self.members[c])

    def move(self, idx: int, src: int, dst: int) -> None:
        p = self._pts[idx]
        self.members[src].discard(idx)
        self.members[dst].add(idx)
        vec = np.array([p.pos.lat, p.pos.lon])
        self.coord_sum[src] -= vec
        self.coord_sum[dst] += vec
        d = p.demand(self.demand)
        self.demand_sum[src] -= d
        self.demand_sum[dst] += d
        self.intra[src] = self._intra_term(src)
        self.intra[dst] = self._intra_term(dst)

    def metrics(self) -> DesignMetrics:
        means = [self.mean(c) for c in range(self.k)]
        interhub = 0.0
        for a in range(self.k):
            for b in range(self.k):
                if a != b:
                    interhub += haversine_km(means[a], means[b])
        intra = float(self.intra.sum())
        dem = self.demand_sum
        mean = dem.mean()
        cv = float(dem.std() / mean) if mean > 0 else 0.0
        return DesignMetrics(
            approx_cost_km=interhub + intra,
            interhub_km=interhub,
            intracluster_km=intra,
            cluster_demand=tuple(float(x) for x in dem),
            demand_cv=cv,
            cluster_sizes=tuple(len(m) for m in self.members),
        )


class AssignmentSession:
    """Editable crisp assignment seeded from an FCM result.

    Linear history with truncate-on-new-move; a move that would empty its
    source cluster is rejected. Capacity targets are advisory only.
    """

    def __init__(self, fc: FuzzyClustering, points: Sequence[DemandPoint],
                 capacity_targets: list[tuple[float, float]] | None = None,
                 demand: str = "delivery",
                 _labels: Sequence[int] | None = None,
                 _history: list[Move] | None = None,
                 _cursor: int = 0) -> None:
        if fc.n != len(points):
            raise SessionError("clustering size does not match point count")
        self.base = fc
        self.points = list(points)
        self.demand_selector = demand
        self._index = {p.id: i for i, p in enumerate(points)}
        labels = list(_labels) if _labels is not None else list(crisp_assignment(fc))
        self._labels = [int(x) for x in labels]
        self._state = _ClusterState(self.points, self._labels, fc.c, demand)
        self.history: list[Move] = list(_history or [])
        self.cursor = _cursor
        self.capacity_targets = capacity_targets
        self._metrics = self._state.metrics()

    @property
    def k(self) -> int:
        return self.base.c

    @property
    def current(self) -> dict[str, int]:
        return {p.id: self._labels[i] for i, p in enumerate(self.points)}

    @property
    def labels(self) -> list[int]:
        return list(self._labels)

    @property
    def metrics(self) -> DesignMetrics:
        return self._metrics

    def capacity_status(self) -> list[dict]:
        """Advisory per-cluster demand vs targets; never blocks a move."""
        out = []
        for c in range(self.k):
            dem = self._metrics.cluster_demand[c]
            row: dict = {"cluster": c, "demand": dem, "target": None, "violation": None}
            if self.capacity_targets is not None:
                lo, hi = self.capacity_targets[c]
                row["target"] = [lo, hi]
                if dem < lo:
                    row["violation"] = "under"
                elif dem > hi:
                    row["violation"] = "over"
            out.append(row)
        return out

    def apply_move(self, point_id: str, to_cluster: int, actor: str = "expert") -> DesignMetrics:
        if point_id not in self._index:
            raise SessionError(f"unknown point: {point_id}")
        if not 0 <= to_cluster < self.k:
            raise SessionError(f"cluster index {to_cluster} out of range")
        idx = self._index[point_id]
        src = self._labels[idx]
        if src == to_cluster:
            raise SessionError("no-op move")
        if len(self._state.members[src]) == 1:
            raise SessionError(f"would empty cluster {src}")
        move = Move(point_id, src, to_cluster, time.time(), actor)
        del self.history[self.cursor:]
        self.history.append(move)
        self.cursor += 1
        self._do(idx, src, to_cluster)
        return self._metrics

    def _do(self, idx: int, src: int, dst: int) -> None:
        self._labels[idx] = dst
        self._state.move(idx, src, dst)
        self._metrics = self._state.metrics()

    def undo(self) -> bool:
        if self.cursor == 0:
            return False
        mv = self.history[self.cursor - 1]
        self.cursor -= 1
        self._do(self._index[mv.point_id], mv.to_cluster, mv.from_cluster)
        return True

    def redo(self) -> bool:
        if self.cursor >= len(self.history):
            return False
        mv = self.history[self.cursor]
        self.cursor += 1
        self._do(self._index[mv.point_id], mv.from_cluster, mv.to_cluster)
        return True

    def suggest(self, cluster: int, limit: int = 10) -> list[Suggestion]:
        """Candidate inbound points for `cluster`, by descending membership.

        delta_cost is the exact objective change if the point were moved,
        against current crisp means. Points that cannot legally move
        (singleton source cluster) are skipped.
        """
        if not 0 <= cluster < self.k:
            raise SessionError(f"cluster index {cluster} out of range")
        base_cost = self._metrics.approx_cost_km
        rows = []
        for i, p in enumerate(self.points):
            src = self._labels[i]
            if src == cluster or len(self._state.members[src]) == 1:
                continue
            self._state.move(i, src, cluster)
            delta = self._state.metrics().approx_cost_km - base_cost
            self._state.move(i, cluster, src)
            rows.append(Suggestion(
                point_id=p.id,
                membership=float(self.base.membership[i, cluster]),
                demand=p.demand(self.demand_selector),
                delta_cost=delta,
            ))
        rows.sort(key=lambda s: (-s.membership, s.point_id))
        return rows[:max(0, limit)]

    def finalize(self) -> NetworkDesign:
        """Freeze the assignment and place one center-of-gravity hub per cluster."""
        hubs = netdesign.place_hubs(self.points, self._labels,
                                    demand=self.demand_selector)
        provenance = "expert_adjusted" if self.cursor > 0 else "fcm_argmax"
        return NetworkDesign(k=self.k, assignment=self.current, hubs=tuple(hubs),
                             provenance=provenance)

    # -- persistence ------------------------------------------------------

    def to_json(self, instance_ref: str = "") -> dict:
        return {
            "instance_ref": instance_ref,
            "fcm": self.base.to_json(),
            "demand_selector": self.demand_selector,
            "current": self.current,
            "history": [
                {"point_id": m.point_id, "from_cluster": m.from_cluster,
                 "to_cluster": m.to_cluster, "timestamp": m.timestamp, "actor": m.actor}
                for m in self.history
            ],
            "cursor": self.cursor,
            "capacity_targets": self.capacity_targets,
        }

    @classmethod
    def from_json(cls, doc: dict, points: Sequence[DemandPoint]) -> "AssignmentSession":
        fc = FuzzyClustering.from_json(doc["fcm"])
        index = {p.id: i for i, p in enumerate(points)}
        labels = [0] * len(points)
        for pid, c in doc["current"].items():
            labels[index[pid]] = int(c)
        history = [Move(m["point_id"], m["from_cluster"], m["to_cluster"],
                        m["timestamp"], m["actor"]) for m in doc["history"]]
        targets = doc.get("capacity_targets")
        if targets is not None:
            targets = [tuple(t) for t in targets]
        return cls(fc, points, capacity_targets=targets,
                   demand=doc.get("demand_selector", "delivery"),
                   _labels=labels, _history=history, _cursor=doc["cursor"])

    def save(self, path: str | Path, instance_ref: str = "") -> None:
        Path(path).write_text(json.dumps(self.to_json(instance_ref), indent=2))


def open_session(fc: FuzzyClustering, points: Sequence[DemandPoint],
                 capacity_targets: list[tuple[float, float]] | None = None,
                 demand: str = "delivery") -> AssignmentSession:
    return AssignmentSession(fc, points, capacity_targets=capacity_targets, demand=demand)


def load_session(path: str | Path, points: Sequence[DemandPoint]) -> AssignmentSession:
    return AssignmentSession.from_json(json.loads(Path(path).read_text()), points)
