"""Core domain entities, file ingestion, and the synthetic instance generator."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import AppConfig
from .geo import GeoPoint


class InstanceError(ValueError):
    """Raised when instance data violates a structural invariant."""


@dataclass(frozen=True)
class DemandPoint:
    """A spoke: a micro-area demand point with daily pickup/delivery volume."""

    id: str
    pos: GeoPoint
    pickup_demand: float
    delivery_demand: float

    def __post_init__(self) -> None:
        for name, v in (("pickup_demand", self.pickup_demand), ("delivery_demand", self.delivery_demand)):
            if not math.isfinite(v) or v < 0:
                raise InstanceError(f"point {self.id}: {name} must be finite and >= 0, got {v}")

    def demand(self, selector: str) -> float:
        if selector == "delivery":
            return self.delivery_demand
        if selector == "pickup":
            return self.pickup_demand
        if selector == "total":
            return self.pickup_demand + self.delivery_demand
        raise ValueError(f"unknown demand selector: {selector}")


@dataclass(frozen=True)
class Parcel:
    id: str
    origin: str
    dest: str
    size: float = 1.0

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise InstanceError(f"parcel {self.id}: size must be positive, got {self.size}")


@dataclass(frozen=True)
class FleetSpec:
    """Homogeneous truck fleet: capacity, cost structure, shift window."""

    truck_capacity: float
    truck_fixed_cost: float
    cost_per_km: float
    shift_start_min: float
    shift_end_min: float

    @classmethod
    def from_config(cls, cfg: AppConfig) -> "FleetSpec":
        return cls(cfg.truck_capacity, cfg.truck_fixed_cost, cfg.cost_per_km,
                   cfg.shift_start_min, cfg.shift_end_min)


@dataclass(frozen=True)
class Instance:
    """A full problem instance: spokes, parcel flows, central DC, fleet."""

    points: tuple[DemandPoint, ...]
    parcels: tuple[Parcel, ...]
    depot: GeoPoint
    fleet: FleetSpec

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise InstanceError("instance needs at least 2 demand points")
        ids = [p.id for p in self.points]
        seen: set[str] = set()
        for pid in ids:
            if pid in seen:
                raise InstanceError(f"duplicate point id: {pid}")
            seen.add(pid)
        for pc in self.parcels:
            for end in (pc.origin, pc.dest):
                if end not in seen:
                    raise InstanceError(f"parcel {pc.id}: unknown endpoint {end}")
        lats = [p.pos.lat for p in self.points]
        lons = [p.pos.lon for p in self.points]
        # ~1 degree per 111 km; the depot must sit within the point bbox + 100 km
        margin = 100.0 / 111.0
        if not (min(lats) - margin <= self.depot.lat <= max(lats) + margin
                and min(lons) - margin <= self.depot.lon <= max(lons) + margin):
            raise InstanceError("depot implausibly far from demand points (>100 km outside bbox)")

    def point_index(self) -> dict[str, DemandPoint]:
        return {p.id: p for p in self.points}


def _parse_float(raw: str, what: str, row: int) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise InstanceError(f"row {row}: malformed {what}: {raw!r}") from None
    if not math.isfinite(v):
        raise InstanceError(f"row {row}: non-finite {what}: {raw!r}")
    return v


def load_points_csv(path: str | Path) -> list[DemandPoint]:
    """Read the `id,lat,lon,pickup_demand,delivery_demand` CSV."""
    points: list[DemandPoint] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "lat", "lon", "pickup_demand", "delivery_demand"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InstanceError(f"points CSV must have header {sorted(required)}")
        for rownum, rec in enumerate(reader, start=2):
            pos = GeoPoint(_parse_float(rec["lat"], "coordinate", rownum),
                           _parse_float(rec["lon"], "coordinate", rownum))
            points.append(DemandPoint(
                id=rec["id"],
                pos=pos,
                pickup_demand=_parse_float(rec["pickup_demand"], "demand", rownum),
                delivery_demand=_parse_float(rec["delivery_demand"], "demand", rownum),
            ))
    return points


def load_parcels_csv(path: str | Path) -> list[Parcel]:
    """Read the `id,origin,dest,size` CSV."""
    parcels: list[Parcel] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "origin", "dest", "size"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InstanceError(f"parcels CSV must have header {sorted(required)}")
        for rownum, rec in enumerate(reader, start=2):
            parcels.append(Parcel(
                id=rec["id"], origin=rec["origin"], dest=rec["dest"],
                size=_parse_float(rec["size"], "size", rownum),
            ))
    return parcels


def load_instance(points_file: str | Path, parcels_file: str | Path,
                  config: AppConfig | str | Path | None = None) -> Instance:
    """Assemble and validate an Instance from CSV files plus config."""
    from .config import load_config

    if config is None or isinstance(config, (str, Path)):
        cfg = load_config(config)
    else:
        cfg = config
    points = load_points_csv(points_file)
    parcels = load_parcels_csv(parcels_file)
    if not cfg.allow_intra_point:
        for pc in parcels:
            if pc.origin == pc.dest:
                raise InstanceError(f"parcel {pc.id}: origin == dest ({pc.origin}) "
                                    "and allow_intra_point is off")
    pid_seen: set[str] = set()
    for pc in parcels:
        if pc.id in pid_seen:
            raise InstanceError(f"duplicate parcel id: {pc.id}")
        pid_seen.add(pc.id)
    lats = [p.pos.lat for p in points]
    lons = [p.pos.lon for p in points]
    depot = GeoPoint((min(lats) + max(lats)) / 2, (min(lons) + max(lons)) / 2)
    return Instance(points=tuple(points), parcels=tuple(parcels), depot=depot,
                    fleet=FleetSpec.from_config(cfg))


def save_points_csv(points, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "lat", "lon", "pickup_demand", "delivery_demand"])
        for p in points:
            writer.writerow([p.id, repr(float(p.pos.lat)), repr(float(p.pos.lon)),
                             repr(float(p.pickup_demand)), repr(float(p.delivery_demand))])


def save_parcels_csv(parcels, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "origin", "dest", "size"])
        for pc in parcels:
            writer.writerow([pc.id, pc.origin, pc.dest, repr(float(pc.size))])


def instance_to_json(inst: Instance) -> dict:
    return {
        "points": [
            {"id": p.id, "pos": {"lat": p.pos.lat, "lon": p.pos.lon},
             "pickup_demand": p.pickup_demand, "delivery_demand": p.delivery_demand}
            for p in inst.points
        ],
        "parcels": [
            {"id": pc.id, "origin": pc.origin, "dest": pc.dest, "size": pc.size}
            for pc in inst.parcels
        ],
        "depot": {"lat": inst.depot.lat, "lon": inst.depot.lon},
        "fleet": {
            "truck_capacity": inst.fleet.truck_capacity,
            "truck_fixed_cost": inst.fleet.truck_fixed_cost,
            "cost_per_km": inst.fleet.cost_per_km,
            "shift_start_min": inst.fleet.shift_start_min,
            "shift_end_min": inst.fleet.shift_end_min,
        },
    }


def instance_from_json(doc: dict) -> Instance:
    points = tuple(
        DemandPoint(id=p["id"], pos=GeoPoint(p["pos"]["lat"], p["pos"]["lon"]),
                    pickup_demand=p["pickup_demand"], delivery_demand=p["delivery_demand"])
        for p in doc["points"]
    )
    parcels = tuple(
        Parcel(id=pc["id"], origin=pc["origin"], dest=pc["dest"], size=pc.get("size", 1.0))
        for pc in doc["parcels"]
    )
    f = doc["fleet"]
    return Instance(points=points, parcels=parcels,
                    depot=GeoPoint(doc["depot"]["lat"], doc["depot"]["lon"]),
                    fleet=FleetSpec(f["truck_capacity"], f["truck_fixed_cost"],
                                    f["cost_per_km"], f["shift_start_min"], f["shift_end_min"]))


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=2, sort_keys=True))


def load_instance_json(path: str | Path) -> Instance:
    return instance_from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class NetworkDesign:
    """Crisp point-to-cluster assignment plus hub locations."""

    k: int
    assignment: dict[str, int]
    hubs: tuple[GeoPoint, ...]
    provenance: str  # "fcm_argmax" | "expert_adjusted"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InstanceError("cluster count must be >= 1")
        if len(self.hubs) != self.k:
            raise InstanceError(f"expected {self.k} hubs, got {len(self.hubs)}")
        used = set(self.assignment.values())
        if any(c < 0 or c >= self.k for c in used):
            raise InstanceError("assignment references cluster index out of range")
        if used != set(range(self.k)):
            empty = sorted(set(range(self.k)) - used)
            raise InstanceError(f"empty cluster(s): {empty}")
        if self.provenance not in ("fcm_argmax", "expert_adjusted"):
            raise InstanceError(f"unknown provenance: {self.provenance}")


def design_to_json(design: NetworkDesign) -> dict:
    return {
        "k": design.k,
        "assignment": dict(design.assignment),
        "hubs": [{"lat": h.lat, "lon": h.lon} for h in design.hubs],
        "provenance": design.provenance,
    }


def design_from_json(doc: dict) -> NetworkDesign:
    return NetworkDesign(
        k=doc["k"],
        assignment={k: int(v) for k, v in doc["assignment"].items()},
        hubs=tuple(GeoPoint(h["lat"], h["lon"]) for h in doc["hubs"]),
        provenance=doc["provenance"],
    )


DEFAULT_BBOX = (10.65, 106.55, 10.90, 106.85)  # roughly the HCMC urban core


def generate_synthetic(seed: int, n_points: int = 77, n_blobs: int = 3,
                       parcels_per_day: int = 150,
                       bbox: tuple[float, float, float, float] = DEFAULT_BBOX,
                       blob_sigma: float | None = None,
                       config: AppConfig | None = None) -> Instance:
    """Deterministic synthetic instance: Gaussian blobs of demand points."""
    inst, _ = generate_synthetic_labeled(seed, n_points, n_blobs, parcels_per_day,
                                         bbox, blob_sigma, config)
    return inst


def generate_synthetic_labeled(seed: int, n_points: int = 77, n_blobs: int = 3,
                               parcels_per_day: int = 150,
                               bbox: tuple[float, float, float, float] = DEFAULT_BBOX,
                               blob_sigma: float | None = None,
                               config: AppConfig | None = None) -> tuple[Instance, np.ndarray]:
    """As generate_synthetic, but also return the ground-truth blob label per point."""
    if n_blobs < 1 or n_points < n_blobs:
        raise InstanceError("need n_points >= n_blobs >= 1")
    lat_min, lon_min, lat_max, lon_max = bbox
    if not (lat_max > lat_min and lon_max > lon_min):
        raise InstanceError("degenerate bbox")
    cfg = config or AppConfig()
    rng = np.random.default_rng(seed)

    # blob centers kept off the bbox edge and mutually separated so the
    # blobs stay distinguishable
    lat_span, lon_span = lat_max - lat_min, lon_max - lon_min
    min_sep = 0.35 * min(lat_span, lon_span)
    centers_list: list[np.ndarray] = []
    while len(centers_list) < n_blobs:
        cand = np.array([
            rng.uniform(lat_min + 0.15 * lat_span, lat_max - 0.15 * lat_span),
            rng.uniform(lon_min + 0.15 * lon_span, lon_max - 0.15 * lon_span),
        ])
        if all(np.linalg.norm(cand - c) >= min_sep for c in centers_list):
            centers_list.append(cand)
        else:
            min_sep *= 0.98  # relax gradually so dense blob counts still terminate
    centers = np.array(centers_list)
    sigma = blob_sigma if blob_sigma is not None else 0.06 * min(lat_span, lon_span)
    labels = rng.integers(0, n_blobs, n_points)
    labels[:n_blobs] = np.arange(n_blobs)  # every blob gets at least one point
    coords = centers[labels] + rng.normal(0.0, sigma, (n_points, 2))
    coords[:, 0] = np.clip(coords[:, 0], lat_min, lat_max)
    coords[:, 1] = np.clip(coords[:, 1], lon_min, lon_max)

    pickup = rng.lognormal(mean=math.log(15.0), sigma=0.6, size=n_points)
    delivery = rng.lognormal(mean=math.log(20.0), sigma=0.6, size=n_points)
    points = tuple(
        DemandPoint(id=f"P{i:03d}",
                    pos=GeoPoint(round(float(coords[i, 0]), 6), round(float(coords[i, 1]), 6)),
                    pickup_demand=round(float(pickup[i]), 3),
                    delivery_demand=round(float(delivery[i]), 3))
        for i in range(n_points)
    )

    p_origin = pickup / pickup.sum()
    p_dest = delivery / delivery.sum()
    parcels: list[Parcel] = []
    for j in range(parcels_per_day):
        o = int(rng.choice(n_points, p=p_origin))
        d = int(rng.choice(n_points, p=p_dest))
        while d == o and not cfg.allow_intra_point:
            d = int(rng.choice(n_points, p=p_dest))
        parcels.append(Parcel(id=f"K{j:04d}", origin=points[o].id, dest=points[d].id, size=1.0))

    # the DC sits near the bbox corner, like a real peri-urban warehouse
    depot = GeoPoint(lat_min + 0.05 * lat_span, lon_min + 0.05 * lon_span)
    inst = Instance(points=points, parcels=tuple(parcels), depot=depot,
                    fleet=FleetSpec.from_config(cfg))
    return inst, labels
