"""Geographic primitives: points, Haversine distances, travel matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} out of [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} out of [-180, 180]")


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class TravelMatrix:
    """Pairwise distances (km) and durations (min) over a fixed location set.

    Symmetric, zero diagonal. Durations are distance / speed scaled to
    minutes; distances already include the detour factor.
    """

    distance_km: np.ndarray
    duration_min: np.ndarray

    def __post_init__(self) -> None:
        d, t = self.distance_km, self.duration_min
        if d.shape != t.shape or d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("matrices must be square and same shape")
        if (d < 0).any() or (t < 0).any():
            raise ValueError("negative matrix entry")
        d.setflags(write=False)
        t.setflags(write=False)

    @property
    def n(self) -> int:
        return self.distance_km.shape[0]


def _haversine_matrix(lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    phi = np.radians(lats)
    lam = np.radians(lons)
    dphi = phi[:, None] - phi[None, :]
    dlam = lam[:, None] - lam[None, :]
    h = np.sin(dphi / 2) ** 2 + np.cos(phi)[:, None] * np.cos(phi)[None, :] * np.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def build_matrix(points: list[GeoPoint], speed_kmh: float = 25.0, detour_factor: float = 1.4) -> TravelMatrix:
    """Build a TravelMatrix from Haversine distances scaled by a detour factor.

    duration_min[i][j] = distance_km[i][j] / speed_kmh * 60.
    """
    if not points:
        raise ValueError("empty location set")
    if speed_kmh <= 0:
        raise ValueError(f"speed_kmh must be positive, got {speed_kmh}")
    if detour_factor < 1.0:
        raise ValueError(f"detour_factor must be >= 1, got {detour_factor}")
    lats = np.array([p.lat for p in points], dtype=float)
    lons = np.array([p.lon for p in points], dtype=float)
    dist = _haversine_matrix(lats, lons) * detour_factor
    np.fill_diagonal(dist, 0.0)
    dist = (dist + dist.T) / 2.0  # enforce exact symmetry against fp noise
    dur = dist / speed_kmh * 60.0
    return TravelMatrix(distance_km=dist, duration_min=dur)
