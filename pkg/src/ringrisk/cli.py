"""Command-line front end.

Every subcommand writes its reports into a run directory together with a
manifest (resolved configuration, input paths, stage timings). ``replay``
re-executes a manifest into a fresh directory; reports are byte-identical,
only the manifest's own timing fields differ.

Exit codes: 0 success, 2 input/parse failure, 3 schema failure, 4 cycle
detected in the invitation graph, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import bench as benchmod
from .analytics import CycleError, RuleThresholds, write_profiles_csv, write_rule_outcomes_jsonl
from .cocontext import WindowConfig, build_cocontext_edges
from .graph import SchemaError
from .ingest import IngestError, parse_risk_events
from .pipeline import (
    CampaignPaths,
    build_shared_ip_edges,
    detect_invitation_fraud,
    load_campaign,
    run_detection,
    sweep,
    write_sweep_csv,
)
from .service import RiskService, ServiceConfig
from .synth import (
    CampaignSpec,
    GeneratorError,
    generate,
    load_ground_truth,
    precision_recall,
    standard_fraud_groups,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_SCHEMA = 3
EXIT_CYCLE = 4


def _utcnow() -> str:
    return datetime.now(tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _default_out(seed) -> Path:
    stamp = datetime.now(tz=timezone.utc).strftime("%Y%m%d-%H%M%S")
    return Path("runs") / f"{stamp}-seed{seed if seed is not None else 0}"


def _write_manifest(out: Path, subcommand: str, inputs: dict, config: dict,
                    outputs: dict, timings: dict, seed, notes: list[str]) -> Path:
    manifest = {
        "subcommand": subcommand,
        "seed": seed,
        "inputs": inputs,
        "config": config,
        "outputs": outputs,
        "timings_s": {k: round(v, 4) for k, v in timings.items()},
        "created_at": _utcnow(),
        "notes": notes,
    }
    path = out / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_config_file(path) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _window_from(config: dict) -> WindowConfig:
    w = dict(config.get("window", {}))
    return WindowConfig.from_dict(w) if w else WindowConfig()


def _thresholds_from(config: dict) -> RuleThresholds:
    return RuleThresholds.from_dict(config.get("thresholds", {}))


# -- subcommand bodies (shared by direct invocation and replay) -----------


def run_generate(inputs: dict, config: dict, out: Path):
    spec = CampaignSpec.from_dict(config["spec"])
    t0 = time.perf_counter()
    files, truth = generate(spec, out)
    timings = {"generate": time.perf_counter() - t0}
    outputs = {
        "orders": files.orders.name,
        "devices": files.devices.name,
        "referrals": files.referrals.name,
        "events": files.events.name,
        "ground_truth": files.ground_truth.name,
    }
    notes = [f"{truth.n_accounts} accounts, {len(truth.fraud_accounts)} fraud"]
    return outputs, timings, notes


def run_load(inputs: dict, config: dict, out: Path):
    paths = CampaignPaths.in_dir(inputs["campaign_dir"])
    t0 = time.perf_counter()
    jobs_config = config.get("jobs")
    if jobs_config:
        from .graph import PropertyGraph, risk_graph_schema
        from .ingest import job_from_dict, run_loading_job

        g = PropertyGraph(risk_graph_schema())
        sources = {"orders": paths.orders, "devices": paths.devices, "referrals": paths.referrals}
        reports = {}
        for name, job_dict in jobs_config.items():
            source = sources.get(name, Path(inputs["campaign_dir"]) / name)
            reports[name] = run_loading_job(g, job_from_dict(job_dict), source)
    else:
        _, reports = load_campaign(paths)
    timings = {"load": time.perf_counter() - t0}
    report = {
        name: {
            "records_read": r.records_read,
            "vertices_upserted": r.vertices_upserted,
            "edges_inserted": r.edges_inserted,
            "rejected": [[line, reason] for line, reason in r.rejected],
        }
        for name, r in reports.items()
    }
    with open(out / "load_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"load_report": "load_report.json"}, timings, []


def run_build_edges(inputs: dict, config: dict, out: Path):
    paths = CampaignPaths.in_dir(inputs["campaign_dir"])
    if paths.events is None:
        raise IngestError(f"no events.jsonl under {inputs['campaign_dir']}")
    store = int(config.get("store_window_s", 3600))
    t0 = time.perf_counter()
    stream = parse_risk_events(paths.events, reorder_buffer=int(config.get("reorder_buffer", 1000)))
    n = 0
    with open(out / "edges.jsonl", "w", encoding="utf-8") as fh:
        for e in build_cocontext_edges(iter(stream), "ip", store):
            fh.write(
                json.dumps(
                    {"a": e.a, "b": e.b, "context_type": e.context_type, "value": e.context_value,
                     "created_at": e.created_at, "delta": e.delta},
                    separators=(",", ":"),
                )
                + "\n"
            )
            n += 1
    timings = {"build_edges": time.perf_counter() - t0}
    notes = [f"{n} edges, {stream.skipped} skipped, {stream.dropped_stragglers} stragglers"]
    return {"edges": "edges.jsonl"}, timings, notes


def run_detect(inputs: dict, config: dict, out: Path):
    paths = CampaignPaths.in_dir(inputs["campaign_dir"])
    th = _thresholds_from(config)
    t0 = time.perf_counter()
    g, _ = load_campaign(paths)
    t1 = time.perf_counter()
    result = detect_invitation_fraud(g, th)
    t2 = time.perf_counter()
    selected = config.get("rules")  # e.g. ["a", "g", "j"]; default all
    outcomes = (
        [o for o in result.outcomes if o.rule_id in set(selected)] if selected else result.outcomes
    )
    write_rule_outcomes_jsonl(outcomes, out / "rules.jsonl")
    write_profiles_csv(result.profiles, out / "profiles.csv")
    timings = {"load": t1 - t0, "detect": t2 - t1}
    return {"rules": "rules.jsonl", "profiles": "profiles.csv"}, timings, []


def run_profile(inputs: dict, config: dict, out: Path):
    paths = CampaignPaths.in_dir(inputs["campaign_dir"])
    t0 = time.perf_counter()
    g, _ = load_campaign(paths)
    result = detect_invitation_fraud(g, _thresholds_from(config))
    write_profiles_csv(result.profiles, out / "profiles.csv")
    return {"profiles": "profiles.csv"}, {"profile": time.perf_counter() - t0}, []


def run_evaluate(inputs: dict, config: dict, out: Path):
    campaign_dir = Path(inputs["campaign_dir"])
    paths = CampaignPaths.in_dir(campaign_dir)
    truth = load_ground_truth(campaign_dir / "ground_truth.jsonl")
    window = _window_from(config) if config.get("window") else None
    t0 = time.perf_counter()
    result, flagged, _ = run_detection(
        paths,
        thresholds=_thresholds_from(config),
        window=window,
        cc_size_threshold=int(config.get("cc_size_threshold", 10)),
        store_window_s=window.store_window_s if window else 3600,
    )
    scores = precision_recall(flagged, truth)
    timings = {"evaluate": time.perf_counter() - t0}
    per_rule = {o.rule_id: len(o.flagged_accounts) for o in result.outcomes}
    payload = {"scores": scores, "flagged_count": len(flagged), "per_rule_accounts": per_rule}
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"metrics": "metrics.json"}, timings, []


def run_sweep(inputs: dict, config: dict, out: Path):
    campaign_dir = Path(inputs["campaign_dir"])
    paths = CampaignPaths.in_dir(campaign_dir)
    truth = load_ground_truth(campaign_dir / "ground_truth.jsonl")
    windows = [int(w) for w in config.get("windows", [10, 30, 100, 3600])]
    thresholds = [int(t) for t in config.get("cc_size_thresholds", [10])]
    t0 = time.perf_counter()
    rows = sweep(paths, truth, windows, thresholds)
    write_sweep_csv(rows, out / "sweep.csv")
    return {"sweep": "sweep.csv"}, {"sweep": time.perf_counter() - t0}, []


def run_bench(inputs: dict, config: dict, out: Path):
    paths = CampaignPaths.in_dir(inputs["campaign_dir"])
    levels = [int(c) for c in config.get("concurrency", [1, 8])]
    requests = int(config.get("requests", 2000))
    notes: list[str] = []
    t0 = time.perf_counter()
    target = config.get("target")
    if target:
        host, _, port = target.partition(":")
        accounts = list(config.get("accounts", [])) or ["probe"]
        rows = benchmod.bench_url(host, int(port or 80), accounts, levels, requests)
    else:
        g, _ = load_campaign(paths)
        if paths.events is not None:
            build_shared_ip_edges(g, paths.events, int(config.get("store_window_s", 3600)))
        window = _window_from(config)
        cfg = ServiceConfig(
            cc_size_threshold=int(config.get("cc_size_threshold", 10)), window=window
        )
        rows = benchmod.bench_service(
            g, cfg, levels, requests, busy_interval_s=float(config.get("busy_interval_s", 0.05))
        )
    benchmod.write_bench_csv(rows, out / "bench.csv")
    idle = [r for r in rows if r.scenario == benchmod.SCENARIO_IDLE]
    if idle and min(r.p95_ms for r in idle) > 100.0:
        notes.append("p95 above 100ms on an idle service; machine looks under-provisioned")
    return {"bench": "bench.csv"}, {"bench": time.perf_counter() - t0}, notes


def run_serve(inputs: dict, config: dict, out: Path):
    paths = CampaignPaths.in_dir(inputs["campaign_dir"])
    window = _window_from(config)
    t0 = time.perf_counter()
    g, _ = load_campaign(paths)
    if paths.events is not None:
        build_shared_ip_edges(g, paths.events, window.store_window_s)
    cfg = ServiceConfig(
        cc_size_threshold=int(config.get("cc_size_threshold", 10)),
        recompute_interval_s=config.get("recompute_interval_s"),
        window=window,
        host=str(config.get("host", "127.0.0.1")),
        port=int(config.get("port", 8080)),
    )
    svc = RiskService(g, cfg)
    host, port = svc.start()
    timings = {"startup": time.perf_counter() - t0}
    print(f"serving on http://{host}:{port}  (GET /risk/<account>, /health, /metrics)")
    run_seconds = config.get("run_seconds")
    try:
        if run_seconds is None:
            while True:
                time.sleep(3600)
        else:
            time.sleep(float(run_seconds))
    except KeyboardInterrupt:
        pass
    finally:
        svc.stop()
    return {}, timings, [f"served on {host}:{port}"]


RUNNERS = {
    "generate": run_generate,
    "load": run_load,
    "build-edges": run_build_edges,
    "detect": run_detect,
    "profile": run_profile,
    "evaluate": run_evaluate,
    "sweep": run_sweep,
    "bench": run_bench,
    "serve": run_serve,
}


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ringrisk", description=__doc__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; flags override it")
        sp.add_argument("--out", help="run directory (default runs/<stamp>-seed<seed>)")

    sp = sub.add_parser("generate", help="emit a labeled synthetic campaign")
    common(sp)
    sp.add_argument("--spec", help="campaign spec JSON file")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--normal", type=int, help="number of normal accounts")
    sp.add_argument("--fraud-mix", type=int, help="groups per fraud pattern")
    sp.add_argument("--collision-groups", type=int, help="normal IP-sharing groups")

    for name, extra in (
        ("load", ("jobs",)),
        ("detect", ()),
        ("profile", ()),
        ("evaluate", ("window", "threshold")),
        ("build-edges", ("store",)),
        ("sweep", ("sweeps",)),
        ("bench", ("benchflags",)),
        ("serve", ("serveflags",)),
    ):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--in", dest="campaign_dir", required=True, help="campaign log directory")
        if "jobs" in extra:
            sp.add_argument("--jobs", help="loading-job declarations (JSON file)")
        if "store" in extra:
            sp.add_argument("--store-window-s", type=int)
        if "window" in extra:
            sp.add_argument("--store-window-s", type=int)
            sp.add_argument("--effective-window-s", type=int)
            sp.add_argument("--recency-days", type=float)
        if "threshold" in extra:
            sp.add_argument("--threshold", type=int, help="component size cutoff")
        if "sweeps" in extra:
            sp.add_argument("--windows", type=_csv_ints, help="comma-separated window sizes")
            sp.add_argument("--thresholds", type=_csv_ints, help="comma-separated size cutoffs")
        if "benchflags" in extra:
            sp.add_argument("--concurrency", type=_csv_ints)
            sp.add_argument("--requests", type=int)
            sp.add_argument("--target", help="host:port of an external service to drive")
        if "serveflags" in extra:
            sp.add_argument("--store-window-s", type=int)
            sp.add_argument("--effective-window-s", type=int)
            sp.add_argument("--recency-days", type=float)
            sp.add_argument("--threshold", type=int)
            sp.add_argument("--interval-s", type=float, help="background recompute interval")
            sp.add_argument("--port", type=int)
            sp.add_argument("--run-seconds", type=float, help="serve for a bounded time")

    sp = sub.add_parser("replay", help="re-run a manifest into a new directory")
    sp.add_argument("manifest")
    sp.add_argument("--out")
    return p


def _resolve(args) -> tuple[str, dict, dict, int | None]:
    """(subcommand, inputs, config, seed) from flags over the config file."""
    config = _load_config_file(getattr(args, "config", None))
    sub = args.subcommand
    inputs: dict = {}
    seed = None

    if sub == "generate":
        spec_dict = dict(config.get("spec", {}))
        if args.spec:
            spec_dict.update(_load_config_file(args.spec))
        if args.seed is not None:
            spec_dict["seed"] = args.seed
        if args.normal is not None:
            spec_dict["n_normal_accounts"] = args.normal
        if args.fraud_mix is not None:
            spec_dict["fraud_groups"] = [
                {"pattern": g.pattern, **dict(g.params)}
                for g in standard_fraud_groups(args.fraud_mix)
            ]
        if args.collision_groups is not None:
            spec_dict["ip_collision_groups"] = args.collision_groups
        spec = CampaignSpec.from_dict(spec_dict)
        config["spec"] = spec.to_dict()
        seed = spec.seed
        return sub, inputs, config, seed

    inputs["campaign_dir"] = args.campaign_dir
    if getattr(args, "jobs", None):
        config["jobs"] = _load_config_file(args.jobs)
    win = dict(config.get("window", {}))
    for flag, key in (
        ("store_window_s", "store_window_s"),
        ("effective_window_s", "effective_window_s"),
        ("recency_days", "recency_days"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            win[key] = v
    if win:
        if "store_window_s" in win and "effective_window_s" not in win:
            win.setdefault("effective_window_s", min(30, int(win["store_window_s"])))
        config["window"] = WindowConfig.from_dict(win).to_dict()
    if getattr(args, "threshold", None) is not None:
        config["cc_size_threshold"] = args.threshold
    if getattr(args, "windows", None) is not None:
        config["windows"] = args.windows
    if getattr(args, "thresholds", None) is not None:
        config["cc_size_thresholds"] = args.thresholds
    if getattr(args, "concurrency", None) is not None:
        config["concurrency"] = args.concurrency
    if getattr(args, "requests", None) is not None:
        config["requests"] = args.requests
    if getattr(args, "target", None) is not None:
        config["target"] = args.target
    if getattr(args, "interval_s", None) is not None:
        config["recompute_interval_s"] = args.interval_s
    if getattr(args, "port", None) is not None:
        config["port"] = args.port
    if getattr(args, "run_seconds", None) is not None:
        config["run_seconds"] = args.run_seconds
    if sub == "build-edges" and getattr(args, "store_window_s", None) is not None:
        config["store_window_s"] = args.store_window_s
    return sub, inputs, config, seed


def _execute(sub: str, inputs: dict, config: dict, seed, out: Path | None) -> Path:
    out = Path(out) if out else _default_out(seed)
    out.mkdir(parents=True, exist_ok=True)
    outputs, timings, notes = RUNNERS[sub](inputs, config, out)
    _write_manifest(out, sub, inputs, config, outputs, timings, seed, notes)
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.subcommand == "replay":
            with open(args.manifest, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
            out = _execute(
                manifest["subcommand"], manifest["inputs"], manifest["config"],
                manifest.get("seed"), args.out,
            )
        else:
            sub, inputs, config, seed = _resolve(args)
            out = _execute(sub, inputs, config, seed, args.out)
        print(f"run directory: {out}")
        return EXIT_OK
    except CycleError as exc:
        print(f"cycle error: {exc}", file=sys.stderr)
        return EXIT_CYCLE
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (IngestError, GeneratorError, json.JSONDecodeError, FileNotFoundError,
            UnicodeDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
