import time

import pytest
from fastapi.testclient import TestClient

from hubspoke.api import create_app
from hubspoke.fcm import FcmParams, run_fcm
from hubspoke.model import generate_synthetic
from hubspoke.session import open_session


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    app = create_app(session_dir=tmp_path_factory.mktemp("api-sessions"))
    c = TestClient(app)
    inst = generate_synthetic(seed=11, n_points=30, n_blobs=3, parcels_per_day=40)
    app.state.store.add_instance("demo", inst)
    return c, inst


def make_session(client, c_values=(3,)):
    c, _ = client
    r = c.post("/api/v1/instances/demo/cluster", json={"c_values": list(c_values)})
    assert r.status_code == 200
    cid = r.json()["clustering_id"]
    r = c.post("/api/v1/sessions", json={"clustering_id": cid})
    assert r.status_code == 201
    return r.json()


def test_get_instance(client):
    c, inst = client
    doc = c.get("/api/v1/instances/demo").json()
    assert doc["id"] == "demo"
    assert len(doc["points"]) == len(inst.points)
    assert c.get("/api/v1/instances/nope").status_code == 404


def test_cluster_sweep_reports_best(client):
    c, _ = client
    r = c.post("/api/v1/instances/demo/cluster", json={"c_values": [2, 3, 4]})
    body = r.json()
    assert [row["c"] for row in body["rows"]] == [2, 3, 4]
    best = min(body["rows"], key=lambda row: row["approx_cost"])
    assert body["best_c"] == best["c"]
    assert body["clustering_id"] == best["clustering_id"]


def test_session_parity_with_headless_driver(client):
    """The API session must match driving the session module directly."""
    c, inst = client
    state = make_session(client)
    sid = state["session_id"]

    fc = run_fcm(inst.points, FcmParams(c=3))
    oracle = open_session(fc, inst.points)
    assert state["assignment"] == {k: v for k, v in oracle.current.items()}

    moves = []
    for pid, cluster in oracle.current.items():
        if oracle.metrics.cluster_sizes[cluster] > 1:
            moves.append((pid, (cluster + 1) % 3))
        if len(moves) == 5:
            break
    for pid, dst in moves:
        r = c.post(f"/api/v1/sessions/{sid}/moves", json={"point": pid, "to": dst})
        assert r.status_code == 200
        oracle.apply_move(pid, dst)
        body = r.json()
        assert body["assignment"] == oracle.current
        assert body["metrics"]["approx_cost_km"] == oracle.metrics.approx_cost_km
    r = c.post(f"/api/v1/sessions/{sid}/undo")
    oracle.undo()
    assert r.json()["metrics"]["approx_cost_km"] == oracle.metrics.approx_cost_km
    r = c.post(f"/api/v1/sessions/{sid}/redo")
    oracle.redo()
    assert r.json()["assignment"] == oracle.current


def test_undo_on_fresh_session_conflicts(client):
    c, _ = client
    sid = make_session(client)["session_id"]
    r = c.post(f"/api/v1/sessions/{sid}/undo")
    assert r.status_code == 409
    assert r.json()["code"] == "conflict"
    assert c.post(f"/api/v1/sessions/{sid}/redo").status_code == 409


def test_emptying_move_conflicts(client):
    c, _ = client
    state = make_session(client)
    sid = state["session_id"]
    # drain one cluster down to a single point, then try to move it out
    assignment = dict(state["assignment"])
    target = assignment[next(iter(assignment))]
    members = [p for p, cl in assignment.items() if cl == target]
    for p in members[:-1]:
        assert c.post(f"/api/v1/sessions/{sid}/moves",
                      json={"point": p, "to": (target + 1) % 3}).status_code == 200
    r = c.post(f"/api/v1/sessions/{sid}/moves",
               json={"point": members[-1], "to": (target + 1) % 3})
    assert r.status_code == 409
    assert "empty" in r.json()["message"]


def test_suggestions_ranked(client):
    c, _ = client
    sid = make_session(client)["session_id"]
    r = c.get(f"/api/v1/sessions/{sid}/suggestions", params={"cluster": 0, "limit": 5})
    rows = r.json()["suggestions"]
    assert len(rows) == 5
    ms = [row["membership"] for row in rows]
    assert ms == sorted(ms, reverse=True)


def test_invalid_body_is_400(client):
    c, _ = client
    sid = make_session(client)["session_id"]
    r = c.post(f"/api/v1/sessions/{sid}/moves", json={"point": 42})
    assert r.status_code == 400
    assert r.json()["code"] == "validation"


def test_unknown_ids_are_404(client):
    c, _ = client
    assert c.get("/api/v1/sessions/nope").status_code == 404
    assert c.post("/api/v1/sessions", json={"clustering_id": "nope"}).status_code == 404
    assert c.get("/api/v1/jobs/nope").status_code == 404
    assert c.post("/api/v1/designs/nope/scenarios/S0/solve").status_code == 404


def wait_job(c, job_id, timeout=120):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = c.get(f"/api/v1/jobs/{job_id}").json()
        if body["status"] in ("done", "error"):
            return body
        time.sleep(0.1)
    raise AssertionError("job did not finish")


def test_finalize_solve_and_report(client):
    c, _ = client
    state = make_session(client)
    sid = state["session_id"]
    r = c.post(f"/api/v1/sessions/{sid}/finalize")
    assert r.status_code == 200
    design_id = r.json()["design_id"]
    assert r.json()["provenance"] == "fcm_argmax"
    assert len(r.json()["hubs"]) == 3

    # report before any solve: no baseline yet
    assert c.get(f"/api/v1/designs/{design_id}/report").status_code == 409

    jobs = {}
    for scen in ("S0", "S2"):
        r = c.post(f"/api/v1/designs/{design_id}/scenarios/{scen}/solve",
                   json={"budget_seconds": 5.0, "budget_iters": 20000, "jobs": 2})
        assert r.status_code == 202
        jobs[scen] = r.json()["job_id"]
    for scen, job_id in jobs.items():
        body = wait_job(c, job_id)
        assert body["status"] == "done", body
        assert body["result"]["scenario"] == scen
        assert body["result"]["total_cost"] == pytest.approx(
            body["result"]["pickup_cost"] + body["result"]["delivery_cost"], abs=1e-9)

    rep = c.get(f"/api/v1/designs/{design_id}/report").json()
    rows = {row["scenario"]: row for row in rep["rows"]}
    assert rows["S0"]["total_ratio"] == pytest.approx(1.0)
    assert set(rows) == {"S0", "S2"}
    assert rep["markdown"].startswith("| scenario |")

    bad = c.post(f"/api/v1/designs/{design_id}/scenarios/S9/solve")
    assert bad.status_code == 400
