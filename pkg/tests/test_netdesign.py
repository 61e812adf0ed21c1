import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import demand_point
from hubspoke.geo import GeoPoint, haversine_km
from hubspoke.netdesign import (
    DesignError,
    approx_cost,
    center_of_gravity,
    crisp_means,
    place_hubs,
)

# frozen from the first verified run: seed-42 instance, c=3 argmax assignment
SEED42_HUBS = [
    (10.714837141412815, 106.68937912866456),
    (10.817451465074663, 106.69085345113665),
    (10.700977497642988, 106.79434055530115),
]


def brute_force_cost(points, assignment, centroids):
    """Independent double-loop evaluation of the partition objective."""
    k = len(centroids)
    interhub = 0.0
    for a in range(k):
        for b in range(k):
            if a != b:
                interhub += haversine_km(centroids[a], centroids[b])
    intra = 0.0
    for i, p in enumerate(points):
        intra += haversine_km(centroids[assignment[i]], p.pos)
    return interhub + intra


def test_single_cluster_has_no_interhub_term():
    pts = [demand_point("a", 0.0, 0.0), demand_point("b", 0.0, 1.0)]
    centroid = GeoPoint(0.0, 0.5)
    m = approx_cost(pts, [0, 0], [centroid])
    assert m.interhub_km == 0.0
    expected = haversine_km(centroid, pts[0].pos) + haversine_km(centroid, pts[1].pos)
    assert m.approx_cost_km == pytest.approx(expected, abs=1e-9)


def test_two_colocated_singletons_hand_case():
    # centroids one degree of longitude apart at the equator, each cluster's
    # point sitting exactly on its centroid: ordered-pair sum counts the
    # inter-hub leg twice
    pts = [demand_point("a", 0.0, 0.0), demand_point("b", 0.0, 1.0)]
    centroids = [GeoPoint(0.0, 0.0), GeoPoint(0.0, 1.0)]
    m = approx_cost(pts, [0, 1], centroids)
    assert m.interhub_km == pytest.approx(222.3898, abs=1e-3)
    assert m.intracluster_km == pytest.approx(0.0, abs=1e-12)
    assert m.approx_cost_km == pytest.approx(222.3898, abs=1e-3)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_matches_brute_force_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 16))
    k = int(rng.integers(1, 5))
    pts = [demand_point(f"p{i}", float(rng.uniform(10, 11)), float(rng.uniform(106, 107)),
                        pickup=float(rng.uniform(0, 5)), delivery=float(rng.uniform(0, 5)))
           for i in range(n)]
    # first k slots pin one point per cluster so the partition is never empty
    assignment = list(range(k)) + [int(rng.integers(0, k)) for _ in range(n - k)]
    centroids = [GeoPoint(float(rng.uniform(10, 11)), float(rng.uniform(106, 107)))
                 for _ in range(k)]
    m = approx_cost(pts, assignment, centroids)
    assert m.approx_cost_km == pytest.approx(brute_force_cost(pts, assignment, centroids), abs=1e-9)
    assert m.approx_cost_km == pytest.approx(m.interhub_km + m.intracluster_km, abs=1e-9)
    assert m.demand_cv >= 0


def test_empty_cluster_rejected():
    pts = [demand_point("a", 0, 0), demand_point("b", 0, 1)]
    with pytest.raises(DesignError, match="empty cluster"):
        approx_cost(pts, [0, 0], [GeoPoint(0, 0), GeoPoint(0, 1)])


def test_center_of_gravity_equal_demand_is_midpoint():
    pts = [demand_point("a", 10.0, 106.0, delivery=4.0),
           demand_point("b", 10.4, 106.8, delivery=4.0)]
    h = center_of_gravity(pts)
    assert h.lat == pytest.approx(10.2, abs=1e-12)
    assert h.lon == pytest.approx(106.4, abs=1e-12)


def test_center_of_gravity_three_to_one_quarter_point():
    pts = [demand_point("heavy", 10.0, 106.0, delivery=3.0),
           demand_point("light", 10.4, 106.4, delivery=1.0)]
    h = center_of_gravity(pts)
    # 3/4 of the way toward the heavy point
    assert h.lat == pytest.approx(10.1, abs=1e-12)
    assert h.lon == pytest.approx(106.1, abs=1e-12)


def test_center_of_gravity_all_demand_at_one_point():
    pts = [demand_point("only", 10.3, 106.3, delivery=7.0),
           demand_point("zero", 10.9, 106.9, delivery=0.0)]
    h = center_of_gravity(pts)
    assert (h.lat, h.lon) == (10.3, 106.3)


def test_center_of_gravity_zero_demand():
    pts = [demand_point("a", 10.0, 106.0, delivery=0.0),
           demand_point("b", 10.4, 106.8, delivery=0.0)]
    with pytest.raises(DesignError, match="zero-demand cluster"):
        center_of_gravity(pts)
    h = center_of_gravity(pts, zero_demand="mean")
    assert h.lat == pytest.approx(10.2)
    assert h.lon == pytest.approx(106.4)


def test_demand_scaling_leaves_hubs_unchanged():
    rng = np.random.default_rng(5)
    pts = [demand_point(f"p{i}", float(rng.uniform(10, 11)), float(rng.uniform(106, 107)),
                        delivery=float(rng.uniform(0.1, 5))) for i in range(12)]
    assignment = [i % 3 for i in range(12)]
    base = place_hubs(pts, assignment)
    scaled_pts = [demand_point(p.id, p.pos.lat, p.pos.lon, delivery=p.delivery_demand * 10)
                  for p in pts]
    scaled = place_hubs(scaled_pts, assignment)
    for a, b in zip(base, scaled):
        assert a.lat == pytest.approx(b.lat, abs=1e-12)
        assert a.lon == pytest.approx(b.lon, abs=1e-12)


def test_hub_inside_cluster_bbox():
    rng = np.random.default_rng(11)
    pts = [demand_point(f"p{i}", float(rng.uniform(10, 11)), float(rng.uniform(106, 107)),
                        delivery=float(rng.uniform(0.1, 5))) for i in range(20)]
    h = center_of_gravity(pts)
    assert min(p.pos.lat for p in pts) <= h.lat <= max(p.pos.lat for p in pts)
    assert min(p.pos.lon for p in pts) <= h.lon <= max(p.pos.lon for p in pts)


def test_point_order_does_not_move_hub():
    pts = [demand_point("a", 10.0, 106.0, delivery=1.0),
           demand_point("b", 10.5, 106.5, delivery=2.0),
           demand_point("c", 10.9, 106.2, delivery=3.0)]
    fwd = center_of_gravity(pts)
    rev = center_of_gravity(pts[::-1])
    assert fwd.lat == pytest.approx(rev.lat, abs=1e-12)
    assert fwd.lon == pytest.approx(rev.lon, abs=1e-12)


def test_place_hubs_cardinality_and_golden(seed42):
    from hubspoke.fcm import FcmParams, crisp_assignment, run_fcm

    inst, _ = seed42
    fc = run_fcm(inst.points, FcmParams(c=3))
    labels = crisp_assignment(fc)
    hubs = place_hubs(inst.points, labels)
    assert len(hubs) == 3
    for h, (lat, lon) in zip(hubs, SEED42_HUBS):
        assert h.lat == pytest.approx(lat, abs=1e-9)
        assert h.lon == pytest.approx(lon, abs=1e-9)


def test_moving_point_to_nearest_centroid_never_increases_intra():
    rng = np.random.default_rng(3)
    pts = [demand_point(f"p{i}", float(rng.uniform(10, 11)), float(rng.uniform(106, 107)))
           for i in range(15)]
    assignment = [i % 3 for i in range(15)]
    centroids = [GeoPoint(10.2, 106.2), GeoPoint(10.5, 106.8), GeoPoint(10.8, 106.4)]
    before = approx_cost(pts, assignment, centroids).intracluster_km
    moved = list(assignment)
    for i, p in enumerate(pts):
        nearest = min(range(3), key=lambda c: haversine_km(centroids[c], p.pos))
        moved[i] = nearest
    if set(moved) == set(range(3)):
        after = approx_cost(pts, moved, centroids).intracluster_km
        assert after <= before + 1e-9


def test_crisp_means_match_numpy():
    pts = [demand_point("a", 10.0, 106.0), demand_point("b", 10.4, 106.4),
           demand_point("c", 10.8, 106.8)]
    means = crisp_means(pts, [0, 0, 1], 2)
    assert means[0].lat == pytest.approx(10.2)
    assert means[1].lon == pytest.approx(106.8)
