"""Fuzzy c-means clustering over demand points, plus the cluster-count sweep.

Iteration distances are Euclidean on (lat, lon) degrees; all cost
evaluation elsewhere is Haversine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import netdesign
from .geo import GeoPoint
from .model import DemandPoint

_SINGULARITY_EPS = 1e-12


class FcmError(ValueError):
    pass


@dataclass(frozen=True)
class FcmParams:
    c: int
    m: float = 3.0
    error: float = 0.002
    maxiter: int = 1000
    seed: int = 12345

    def __post_init__(self) -> None:
        if self.c < 2:
            raise FcmError(f"cluster count must be >= 2, got {self.c}")
        if self.m <= 1.0:
            raise FcmError("fuzziness m must be > 1")
        if self.error <= 0:
            raise FcmError("convergence threshold must be positive")
        if self.maxiter < 1:
            raise FcmError("maxiter must be >= 1")


@dataclass(frozen=True)
class FuzzyClustering:
    membership: np.ndarray  # (N, c), rows sum to 1
    centroids: tuple[GeoPoint, ...]
    iterations_run: int
    converged: bool
    fpc: float

    @property
    def n(self) -> int:
        return self.membership.shape[0]

    @property
    def c(self) -> int:
        return self.membership.shape[1]

    def to_json(self) -> dict:
        return {
            "membership": self.membership.tolist(),
            "centroids": [{"lat": g.lat, "lon": g.lon} for g in self.centroids],
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "fpc": self.fpc,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FuzzyClustering":
        return cls(
            membership=np.array(doc["membership"], dtype=float),
            centroids=tuple(GeoPoint(g["lat"], g["lon"]) for g in doc["centroids"]),
            iterations_run=doc["iterations_run"],
            converged=doc["converged"],
            fpc=doc["fpc"],
        )


def _centroids(w: np.ndarray, coords: np.ndarray, m: float) -> np.ndarray:
    wm = w ** m
    return (wm.T @ coords) / wm.sum(axis=0)[:, None]


def _update_membership(coords: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    # squared Euclidean distances point x centroid
    diff = coords[:, None, :] - centers[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    w = np.empty((coords.shape[0], centers.shape[0]))
    near = dist < _SINGULARITY_EPS
    coincident = near.any(axis=1)
    # standard update: w_ik proportional to d_ik^(-2/(m-1))
    with np.errstate(divide="ignore"):
        inv = np.where(dist > 0, dist, 1.0) ** (-2.0 / (m - 1.0))
    w = inv / inv.sum(axis=1, keepdims=True)
    for i in np.nonzero(coincident)[0]:
        row = np.zeros(centers.shape[0])
        row[np.argmax(near[i])] = 1.0
        w[i] = row
    return w


def partition_coefficient_matrix(membership: np.ndarray) -> float:
    """Mean squared membership: 1 for crisp partitions, 1/c for uniform."""
    return float((membership ** 2).sum() / membership.shape[0])


def partition_coefficient(fc: FuzzyClustering) -> float:
    return partition_coefficient_matrix(fc.membership)


def run_fcm(points: Sequence[DemandPoint], params: FcmParams) -> FuzzyClustering:
    """Alternate membership/centroid updates until the membership matrix settles.

    Stops when the max absolute membership change drops below params.error
    or after params.maxiter iterations. Deterministic for a fixed seed.
    """
    n = len(points)
    if n < params.c:
        raise FcmError(f"fewer points than clusters (N={n}, c={params.c})")
    coords = np.array([[p.pos.lat, p.pos.lon] for p in points], dtype=float)

    rng = np.random.default_rng(params.seed)
    w = rng.random((n, params.c))
    w /= w.sum(axis=1, keepdims=True)

    converged = False
    iterations = 0
    centers = np.zeros((params.c, 2))
    for iterations in range(1, params.maxiter + 1):
        centers = _centroids(w, coords, params.m)
        w_new = _update_membership(coords, centers, params.m)
        delta = float(np.abs(w_new - w).max())
        w = w_new
        if delta < params.error:
            converged = True
            break

    centroids = tuple(GeoPoint(float(la), float(lo)) for la, lo in centers)
    return FuzzyClustering(membership=w, centroids=centroids,
                           iterations_run=iterations, converged=converged,
                           fpc=partition_coefficient_matrix(w))


def crisp_assignment(fc: FuzzyClustering) -> np.ndarray:
    """Argmax labels (ties to the lowest index), with empty-cluster repair."""
    labels = np.argmax(fc.membership, axis=1).astype(int)
    for c in range(fc.c):
        if not (labels == c).any():
            counts = np.bincount(labels, minlength=fc.c)
            movable = np.array([counts[labels[i]] > 1 for i in range(fc.n)])
            if not movable.any():
                raise FcmError("cannot repair empty cluster without emptying another")
            cand = np.where(movable, fc.membership[:, c], -np.inf)
            labels[int(np.argmax(cand))] = c
    return labels


@dataclass(frozen=True)
class SweepRow:
    c: int
    approx_cost: float
    fpc: float
    clustering: FuzzyClustering


def sweep_cluster_counts(points: Sequence[DemandPoint], c_values: Sequence[int],
                         m: float = 3.0, error: float = 0.002, maxiter: int = 1000,
                         seed: int = 12345, demand: str = "delivery") -> list[SweepRow]:
    """Run FCM for each candidate c and evaluate the partition objective."""
    if not c_values:
        raise FcmError("empty sweep range")
    rows = []
    for c in sorted(c_values):
        fc = run_fcm(points, FcmParams(c=c, m=m, error=error, maxiter=maxiter, seed=seed))
        labels = crisp_assignment(fc)
        metrics = netdesign.approx_cost(points, labels, fc.centroids, demand=demand)
        rows.append(SweepRow(c=c, approx_cost=metrics.approx_cost_km, fpc=fc.fpc, clustering=fc))
    return rows
