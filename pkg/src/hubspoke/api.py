"""HTTP JSON service for the expert UI: instances, clustering, sessions
with serialized mutations, and asynchronous scenario solve jobs."""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import fcm, model, netdesign, report, scenarios, session as sess
from .config import AppConfig
from .vrptw import Budget, InfeasibleError


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


def _error_body(code: str, message: str, details: dict | None = None) -> dict:
    return {"code": code, "message": message, "details": details or {}}


class ClusterRequest(BaseModel):
    c_values: list[int] = [2, 3, 4, 5]
    m: float = 3.0
    error: float = 0.002
    maxiter: int = 1000
    seed: int = 12345


class SessionRequest(BaseModel):
    clustering_id: str
    capacity_targets: list[tuple[float, float]] | None = None


class MoveRequest(BaseModel):
    point: str
    to: int
    actor: str = "webui"


class SolveRequest(BaseModel):
    budget_seconds: float = 5.0
    budget_iters: int = 50_000
    seed: int = 0
    jobs: int = 2


@dataclass
class _SessionEntry:
    session: sess.AssignmentSession
    instance_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)


class AppState:
    def __init__(self, session_dir: str | Path, config: AppConfig | None = None,
                 max_workers: int = 4) -> None:
        self.config = config or AppConfig()
        self.session_dir = Path(session_dir)
        self.session_dir.mkdir(parents=True, exist_ok=True)
        self.instance_dir = self.session_dir / "instances"
        self.instance_dir.mkdir(parents=True, exist_ok=True)
        self.instances: dict[str, model.Instance] = {}
        self.clusterings: dict[str, tuple[str, fcm.FuzzyClustering]] = {}
        self.sessions: dict[str, _SessionEntry] = {}
        self.designs: dict[str, tuple[str, model.NetworkDesign]] = {}
        self.jobs: dict[str, dict] = {}
        self.results: dict[tuple[str, str], scenarios.ScenarioResult] = {}
        self.executor = ThreadPoolExecutor(max_workers=max_workers)

    def add_instance(self, instance_id: str, inst: model.Instance) -> None:
        self.instances[instance_id] = inst
        model.save_instance(inst, self.instance_dir / f"{instance_id}.json")

    def get_instance(self, instance_id: str) -> model.Instance:
        if instance_id not in self.instances:
            path = self.instance_dir / f"{instance_id}.json"
            if not path.exists():
                raise ApiException(404, "not_found", f"unknown instance: {instance_id}")
            self.instances[instance_id] = model.load_instance_json(path)
        return self.instances[instance_id]

    def get_session(self, session_id: str) -> _SessionEntry:
        if session_id not in self.sessions:
            path = self.session_dir / f"{session_id}.json"
            if not path.exists():
                raise ApiException(404, "not_found", f"unknown session: {session_id}")
            doc = json.loads(path.read_text())
            inst = self.get_instance(doc["instance_ref"])
            self.sessions[session_id] = _SessionEntry(
                session=sess.AssignmentSession.from_json(doc, inst.points),
                instance_id=doc["instance_ref"])
        return self.sessions[session_id]

    def persist_session(self, session_id: str) -> None:
        entry = self.sessions[session_id]
        entry.session.save(self.session_dir / f"{session_id}.json",
                           instance_ref=entry.instance_id)


def _session_state(session_id: str, entry: _SessionEntry) -> dict:
    s = entry.session
    return {
        "session_id": session_id,
        "instance_id": entry.instance_id,
        "k": s.k,
        "assignment": s.current,
        "membership": s.base.membership.tolist(),
        "metrics": s.metrics.to_json(),
        "capacity": s.capacity_status(),
        "cursor": s.cursor,
        "history_length": len(s.history),
        "can_undo": s.cursor > 0,
        "can_redo": s.cursor < len(s.history),
    }


def create_app(session_dir: str | Path = "./sessions",
               config: AppConfig | None = None) -> FastAPI:
    state = AppState(session_dir, config)
    app = FastAPI(title="hubspoke", version="0.1.0")
    app.state.store = state
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(ApiException)
    async def _api_exc(request: Request, exc: ApiException):
        return JSONResponse(status_code=exc.status,
                            content=_error_body(exc.code, exc.message, exc.details))

    @app.exception_handler(RequestValidationError)
    async def _val_exc(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content=_error_body("validation", "invalid request body",
                                                {"errors": exc.errors()}))

    @app.get("/api/v1/instances/{instance_id}")
    def get_instance(instance_id: str):
        inst = state.get_instance(instance_id)
        doc = model.instance_to_json(inst)
        doc["id"] = instance_id
        return doc

    @app.post("/api/v1/instances/{instance_id}/cluster")
    def cluster(instance_id: str, req: ClusterRequest):
        inst = state.get_instance(instance_id)
        try:
            rows = fcm.sweep_cluster_counts(inst.points, req.c_values, m=req.m,
                                            error=req.error, maxiter=req.maxiter,
                                            seed=req.seed,
                                            demand=state.config.gravity_demand)
        except fcm.FcmError as e:
            raise ApiException(400, "validation", str(e))
        out_rows = []
        best = min(rows, key=lambda r: r.approx_cost)
        best_id = None
        for row in rows:
            cid = f"{instance_id}-c{row.c}-{uuid.uuid4().hex[:8]}"
            state.clusterings[cid] = (instance_id, row.clustering)
            out_rows.append({"c": row.c, "approx_cost": row.approx_cost,
                             "fpc": row.fpc, "clustering_id": cid})
            if row is best:
                best_id = cid
        return {"clustering_id": best_id, "best_c": best.c, "rows": out_rows}

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(req: SessionRequest):
        if req.clustering_id not in state.clusterings:
            raise ApiException(404, "not_found", f"unknown clustering: {req.clustering_id}")
        instance_id, fc = state.clusterings[req.clustering_id]
        inst = state.get_instance(instance_id)
        s = sess.open_session(fc, inst.points, capacity_targets=req.capacity_targets,
                              demand=state.config.gravity_demand)
        session_id = uuid.uuid4().hex[:12]
        state.sessions[session_id] = _SessionEntry(session=s, instance_id=instance_id)
        state.persist_session(session_id)
        return _session_state(session_id, state.sessions[session_id])

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_state(session_id, state.get_session(session_id))

    @app.post("/api/v1/sessions/{session_id}/moves")
    def post_move(session_id: str, req: MoveRequest):
        entry = state.get_session(session_id)
        with entry.lock:
            try:
                entry.session.apply_move(req.point, req.to, actor=req.actor)
            except sess.SessionError as e:
                raise ApiException(409, "conflict", str(e))
            state.persist_session(session_id)
            return _session_state(session_id, entry)

    @app.post("/api/v1/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        entry = state.get_session(session_id)
        with entry.lock:
            if not entry.session.undo():
                raise ApiException(409, "conflict", "nothing to undo")
            state.persist_session(session_id)
            return _session_state(session_id, entry)

    @app.post("/api/v1/sessions/{session_id}/redo")
    def post_redo(session_id: str):
        entry = state.get_session(session_id)
        with entry.lock:
            if not entry.session.redo():
                raise ApiException(409, "conflict", "nothing to redo")
            state.persist_session(session_id)
            return _session_state(session_id, entry)

    @app.get("/api/v1/sessions/{session_id}/suggestions")
    def get_suggestions(session_id: str, cluster: int, limit: int = 10):
        entry = state.get_session(session_id)
        try:
            suggestions = entry.session.suggest(cluster, limit)
        except sess.SessionError as e:
            raise ApiException(400, "validation", str(e))
        return {"cluster": cluster, "suggestions": [
            {"point": s.point_id, "membership": s.membership,
             "demand": s.demand, "delta_cost": s.delta_cost}
            for s in suggestions
        ]}

    @app.post("/api/v1/sessions/{session_id}/finalize")
    def post_finalize(session_id: str):
        entry = state.get_session(session_id)
        with entry.lock:
            try:
                design = entry.session.finalize()
            except netdesign.DesignError as e:
                raise ApiException(409, "conflict", str(e))
        design_id = uuid.uuid4().hex[:12]
        state.designs[design_id] = (entry.instance_id, design)
        return {"design_id": design_id, "provenance": design.provenance,
                "hubs": [{"cluster": i, "lat": h.lat, "lon": h.lon}
                         for i, h in enumerate(design.hubs)]}

    def _run_job(job_id: str, design_id: str, sid: str, req: SolveRequest) -> None:
        job = state.jobs[job_id]
        job["status"] = "running"
        try:
            instance_id, design = state.designs[design_id]
            inst = state.get_instance(instance_id)
            plan = scenarios.expand(design, inst, sid, state.config)
            result = scenarios.solve_scenario(
                plan, inst, state.config,
                budget=Budget(req.budget_seconds, req.budget_iters),
                seed=req.seed, jobs=req.jobs)
            state.results[(design_id, sid)] = result
            job["status"] = "done"
            job["result"] = result.to_json()
        except InfeasibleError as e:
            job["status"] = "error"
            job["error"] = _error_body("infeasible", str(e))
        except Exception as e:  # surfaced to the client as job failure
            job["status"] = "error"
            job["error"] = _error_body("internal", str(e))

    @app.post("/api/v1/designs/{design_id}/scenarios/{sid}/solve", status_code=202)
    def post_solve(design_id: str, sid: str, req: SolveRequest | None = None):
        if design_id not in state.designs:
            raise ApiException(404, "not_found", f"unknown design: {design_id}")
        if sid not in ("S0", "S1", "S2", "S3"):
            raise ApiException(400, "validation", f"unknown scenario: {sid}")
        req = req or SolveRequest()
        job_id = uuid.uuid4().hex[:12]
        state.jobs[job_id] = {"status": "queued", "design_id": design_id, "scenario": sid}
        state.executor.submit(_run_job, job_id, design_id, sid, req)
        return {"job_id": job_id}

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str):
        if job_id not in state.jobs:
            raise ApiException(404, "not_found", f"unknown job: {job_id}")
        job = state.jobs[job_id]
        out = {"job_id": job_id, "status": job["status"],
               "design_id": job["design_id"], "scenario": job["scenario"]}
        if job["status"] == "done":
            out["result"] = job["result"]
        if job["status"] == "error":
            out["error"] = job["error"]
        return out

    @app.get("/api/v1/designs/{design_id}/report")
    def get_report(design_id: str):
        if design_id not in state.designs:
            raise ApiException(404, "not_found", f"unknown design: {design_id}")
        solved = {sid: res for (did, sid), res in state.results.items() if did == design_id}
        try:
            comp = report.compare_scenarios(solved)
        except report.ReportError as e:
            raise ApiException(409, "conflict", str(e))
        return {"columns": report.COMPARISON_COLUMNS,
                "rows": [r.__dict__ for r in comp.rows],
                "markdown": report.render_comparison(comp, "markdown")}

    return app
