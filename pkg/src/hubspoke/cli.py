"""Command-line pipeline: generate -> cluster -> session -> hubs -> scenario
-> compare, plus the API server. Artifacts flow between commands as JSON."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import fcm, model, netdesign, report, scenarios, session as sess
from .config import AppConfig, load_config
from .vrptw import Budget, InfeasibleError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_VALIDATION) -> None:
        super().__init__(message)
        self.exit_code = exit_code


def _config_from_args(args) -> AppConfig:
    overrides = {}
    for key in ("speed_kmh", "detour_factor", "truck_capacity", "truck_fixed_cost",
                "cost_per_km", "handoff_radius_km", "gravity_demand"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    try:
        return load_config(args.config, overrides=overrides)
    except (ValueError, FileNotFoundError) as e:
        code = EXIT_IO if isinstance(e, FileNotFoundError) else EXIT_VALIDATION
        raise CliError(str(e), code) from e


def _load_instance(path: str) -> model.Instance:
    try:
        return model.load_instance_json(path)
    except FileNotFoundError as e:
        raise CliError(f"instance file not found: {path}", EXIT_IO) from e
    except (json.JSONDecodeError, KeyError, model.InstanceError) as e:
        raise CliError(f"bad instance file {path}: {e}") from e


def _read_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise CliError(f"{what} file not found: {path}", EXIT_IO) from e
    except json.JSONDecodeError as e:
        raise CliError(f"bad {what} file {path}: {e}") from e


def cmd_generate(args) -> int:
    cfg = _config_from_args(args)
    inst = model.generate_synthetic(seed=args.seed, n_points=args.points,
                                    n_blobs=args.blobs, parcels_per_day=args.parcels,
                                    config=cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save_instance(inst, out / "instance.json")
    model.save_points_csv(inst.points, out / "points.csv")
    model.save_parcels_csv(inst.parcels, out / "parcels.csv")
    print(f"wrote {out}/instance.json ({len(inst.points)} points, {len(inst.parcels)} parcels)")
    return EXIT_OK


def cmd_cluster(args) -> int:
    cfg = _config_from_args(args)
    inst = _load_instance(args.instance)
    if args.c_max < args.c_min:
        raise CliError("empty sweep range (c-max < c-min)")
    c_values = list(range(args.c_min, args.c_max + 1))
    try:
        rows = fcm.sweep_cluster_counts(inst.points, c_values, m=args.m, error=args.error,
                                        maxiter=args.maxiter, seed=args.seed,
                                        demand=cfg.gravity_demand)
    except fcm.FcmError as e:
        raise CliError(str(e)) from e
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(report.render_sweep(rows, "csv"))
    (out / "sweep.json").write_text(report.render_sweep(rows, "json"))
    chosen = args.c if args.c is not None else min(rows, key=lambda r: r.approx_cost).c
    best = next(r for r in rows if r.c == chosen)
    (out / "clustering.json").write_text(json.dumps(best.clustering.to_json(), indent=2))
    print(report.render_sweep(rows, "markdown"), end="")
    print(f"chosen c={chosen}; wrote {out}/clustering.json and {out}/sweep.csv")
    return EXIT_OK


def _load_session(args, inst) -> sess.AssignmentSession:
    doc = _read_json(args.session, "session")
    try:
        return sess.AssignmentSession.from_json(doc, inst.points)
    except (KeyError, sess.SessionError) as e:
        raise CliError(f"bad session file: {e}") from e


def cmd_session(args) -> int:
    cfg = _config_from_args(args)
    inst = _load_instance(args.instance)
    if args.session_cmd == "create":
        doc = _read_json(args.clustering, "clustering")
        fc = fcm.FuzzyClustering.from_json(doc)
        s = sess.open_session(fc, inst.points, demand=cfg.gravity_demand)
        s.save(args.out, instance_ref=args.instance)
        print(f"session created: {args.out} (k={s.k}, cost={s.metrics.approx_cost_km:.4f} km)")
        return EXIT_OK

    s = _load_session(args, inst)
    if args.session_cmd == "apply":
        try:
            m = s.apply_move(args.point, args.to, actor=args.actor)
        except sess.SessionError as e:
            raise CliError(str(e)) from e
        s.save(args.session, instance_ref=args.instance)
        print(f"moved {args.point} -> cluster {args.to}; cost={m.approx_cost_km:.4f} km")
    elif args.session_cmd in ("undo", "redo"):
        done = s.undo() if args.session_cmd == "undo" else s.redo()
        if not done:
            print(f"nothing to {args.session_cmd}")
        else:
            s.save(args.session, instance_ref=args.instance)
            print(f"{args.session_cmd} ok; cost={s.metrics.approx_cost_km:.4f} km")
    elif args.session_cmd == "suggest":
        for sug in s.suggest(args.cluster, args.limit):
            print(f"{sug.point_id}  membership={sug.membership:.4f}  "
                  f"demand={sug.demand:.2f}  delta_cost={sug.delta_cost:+.4f} km")
    elif args.session_cmd == "finalize":
        try:
            design = s.finalize()
        except netdesign.DesignError as e:
            raise CliError(str(e)) from e
        Path(args.out).write_text(json.dumps(model.design_to_json(design), indent=2))
        print(f"design written: {args.out} (provenance={design.provenance})")
    else:  # pragma: no cover - argparse guards this
        raise CliError(f"unknown session subcommand: {args.session_cmd}")
    return EXIT_OK


def cmd_hubs(args) -> int:
    cfg = _config_from_args(args)
    inst = _load_instance(args.instance)
    design = model.design_from_json(_read_json(args.design, "design"))
    index = {p.id: i for i, p in enumerate(inst.points)}
    labels = [0] * len(inst.points)
    for pid, c in design.assignment.items():
        labels[index[pid]] = c
    try:
        hubs = netdesign.place_hubs(inst.points, labels, demand=cfg.gravity_demand,
                                    zero_demand=cfg.gravity_zero_demand)
    except netdesign.DesignError as e:
        raise CliError(str(e)) from e
    doc = [{"cluster": i, "lat": h.lat, "lon": h.lon} for i, h in enumerate(hubs)]
    Path(args.out).write_text(json.dumps(doc, indent=2))
    print(f"wrote {len(hubs)} hub locations to {args.out}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    cfg = _config_from_args(args)
    inst = _load_instance(args.instance)
    design = model.design_from_json(_read_json(args.design, "design"))
    which = ["S0", "S1", "S2", "S3"] if args.which == "all" else [args.which]
    budget = Budget(max_seconds=args.budget_seconds, max_iters=args.budget_iters)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for sid in which:
        plan = scenarios.expand(design, inst, sid, cfg)
        try:
            result = scenarios.solve_scenario(plan, inst, cfg, budget=budget,
                                              seed=args.seed, jobs=args.jobs)
        except InfeasibleError as e:
            raise CliError(f"{sid}: {e}", EXIT_INFEASIBLE) from e
        path = out / f"{sid}.json"
        path.write_text(json.dumps(result.to_json(), indent=2))
        print(f"{sid}: trucks={result.trucks_used} total={result.total_cost:.2f} "
              f"pickup={result.pickup_cost:.2f} delivery={result.delivery_cost:.2f} -> {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from types import SimpleNamespace
    results = {}
    for path in args.plans:
        doc = _read_json(path, "plan")
        results[doc["scenario"]] = SimpleNamespace(
            trucks_used=doc["trucks_used"], total_cost=doc["total_cost"],
            pickup_cost=doc["pickup_cost"], delivery_cost=doc["delivery_cost"])
    try:
        comp = report.compare_scenarios(results)
        rendered = report.render_comparison(comp, args.format)
    except report.ReportError as e:
        raise CliError(str(e)) from e
    if args.out:
        Path(args.out).write_text(rendered)
    else:
        print(rendered, end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(session_dir=args.session_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hubspoke",
                                     description="Hub-and-spoke logistics network design pipeline")
    parser.add_argument("--config", default=None, help="TOML/JSON config file")
    parser.add_argument("--json-errors", action="store_true",
                        help="emit machine-readable error JSON on stderr")
    for key, typ in (("speed_kmh", float), ("detour_factor", float), ("truck_capacity", float),
                     ("truck_fixed_cost", float), ("cost_per_km", float),
                     ("handoff_radius_km", float), ("gravity_demand", str)):
        parser.add_argument("--" + key.replace("_", "-"), type=typ, default=None,
                            dest=key, help=f"override config key {key}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--points", type=int, default=77)
    p.add_argument("--blobs", type=int, default=3)
    p.add_argument("--parcels", type=int, default=150)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", help="FCM sweep over cluster counts")
    p.add_argument("--instance", required=True)
    p.add_argument("--c-min", type=int, default=2)
    p.add_argument("--c-max", type=int, default=5)
    p.add_argument("--c", type=int, default=None, help="force the chosen c (default: min cost)")
    p.add_argument("--m", type=float, default=3.0)
    p.add_argument("--error", type=float, default=0.002)
    p.add_argument("--maxiter", type=int, default=1000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("session", help="expert assignment session")
    ssub = p.add_subparsers(dest="session_cmd", required=True)
    sc = ssub.add_parser("create")
    sc.add_argument("--clustering", required=True)
    sc.add_argument("--instance", required=True)
    sc.add_argument("--out", required=True)
    for name in ("apply", "undo", "redo", "suggest", "finalize"):
        sp = ssub.add_parser(name)
        sp.add_argument("--session", required=True)
        sp.add_argument("--instance", required=True)
        if name == "apply":
            sp.add_argument("--point", required=True)
            sp.add_argument("--to", type=int, required=True)
            sp.add_argument("--actor", default="cli")
        if name == "suggest":
            sp.add_argument("--cluster", type=int, required=True)
            sp.add_argument("--limit", type=int, default=10)
        if name == "finalize":
            sp.add_argument("--out", required=True)
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("hubs", help="center-of-gravity hub coordinates")
    p.add_argument("--design", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hubs)

    p = sub.add_parser("scenario", help="expand and solve flow scenarios")
    p.add_argument("--design", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--which", choices=["S0", "S1", "S2", "S3", "all"], default="all")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-seconds", type=float, default=5.0)
    p.add_argument("--budget-iters", type=int, default=50_000)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("compare", help="scenario cost comparison table")
    p.add_argument("--plans", nargs="+", required=True)
    p.add_argument("--format", choices=["csv", "json", "markdown"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="start the HTTP API for the web UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--session-dir", default="./sessions")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        if args.json_errors:
            print(json.dumps({"error": str(e), "exit_code": e.exit_code}), file=sys.stderr)
        else:
            print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except InfeasibleError as e:
        if args.json_errors:
            print(json.dumps({"error": str(e), "exit_code": EXIT_INFEASIBLE}), file=sys.stderr)
        else:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as e:
        if args.json_errors:
            print(json.dumps({"error": str(e), "exit_code": EXIT_IO}), file=sys.stderr)
        else:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
