"""Latency and throughput measurement for the lookup service.

The driver is a plain threaded HTTP client over persistent connections; it
measures the two serving scenarios that matter operationally: lookups on an
idle service and lookups while component recomputation churns in the
background.
"""

from __future__ import annotations

import csv
import gc
import random
import threading
import time
from dataclasses import dataclass, replace
from http.client import HTTPConnection

import numpy as np

from .cocontext import WindowConfig
from .graph import PropertyGraph, risk_graph_schema
from .service import RiskService, ServiceConfig, build_score_table

SCENARIO_IDLE = "no_background_recompute"
SCENARIO_BUSY = "with_background_recompute"


@dataclass(frozen=True)
class BenchRow:
    scenario: str
    concurrency: int
    requests: int
    elapsed_s: float
    qps: float
    p50_ms: float
    p95_ms: float
    p99_ms: float
    errors: int


def run_load(
    host: str, port: int, accounts: list[str], concurrency: int, total_requests: int
) -> tuple[np.ndarray, float, int]:
    """Hammer GET /risk/{account} from N worker threads, keep-alive on.

    Returns (per-request latencies in seconds, wall elapsed, error count).
    The cycle collector is paused for the measurement window so driver-side
    collection stalls do not pollute the latency distribution.
    """
    per_worker = max(1, total_requests // concurrency)
    lat_buckets: list[list[float]] = [[] for _ in range(concurrency)]
    errors = [0] * concurrency
    barrier = threading.Barrier(concurrency + 1)

    def worker(wid: int):
        conn = HTTPConnection(host, port, timeout=10)
        lat = lat_buckets[wid]
        barrier.wait()
        for k in range(per_worker):
            account = accounts[(wid * per_worker + k) % len(accounts)]
            t0 = time.perf_counter()
            try:
                conn.request("GET", "/risk/" + account)
                resp = conn.getresponse()
                resp.read()
                if resp.status != 200:
                    errors[wid] += 1
            except OSError:
                errors[wid] += 1
                conn.close()
                conn = HTTPConnection(host, port, timeout=10)
                continue
            lat.append(time.perf_counter() - t0)
        conn.close()

    threads = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(concurrency)]
    for t in threads:
        t.start()
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        barrier.wait()
        started = time.perf_counter()
        for t in threads:
            t.join()
        elapsed = time.perf_counter() - started
    finally:
        if gc_was_enabled:
            gc.enable()
    all_lat = np.array([x for bucket in lat_buckets for x in bucket], dtype=float)
    return all_lat, elapsed, sum(errors)


def summarize(scenario: str, concurrency: int, latencies: np.ndarray, elapsed: float, errors: int) -> BenchRow:
    if len(latencies):
        p50, p95, p99 = (float(x) * 1000.0 for x in np.percentile(latencies, [50, 95, 99]))
    else:
        p50 = p95 = p99 = 0.0
    n = len(latencies)
    return BenchRow(
        scenario=scenario,
        concurrency=concurrency,
        requests=n,
        elapsed_s=elapsed,
        qps=n / elapsed if elapsed > 0 else 0.0,
        p50_ms=p50,
        p95_ms=p95,
        p99_ms=p99,
        errors=errors,
    )


def bench_service(
    graph: PropertyGraph,
    base_config: ServiceConfig,
    concurrency_levels: list[int],
    requests_per_level: int = 2000,
    busy_interval_s: float = 0.05,
    scenarios: tuple[str, ...] = (SCENARIO_IDLE, SCENARIO_BUSY),
    warmup_requests: int = 50,
) -> list[BenchRow]:
    """Run the lookup benchmark in-process against a fresh service per scenario."""
    rows = []
    for scenario in scenarios:
        interval = busy_interval_s if scenario == SCENARIO_BUSY else None
        cfg = replace(base_config, recompute_interval_s=interval, port=0)
        svc = RiskService(graph, cfg)
        host, port = svc.start()
        try:
            table = svc.published
            accounts = list(table.records.keys()) if table and table.records else list(
                graph.vertices("Account")
            )
            if not accounts:
                accounts = ["none"]
            run_load(host, port, accounts, 1, warmup_requests)
            for c in concurrency_levels:
                lat, elapsed, errors = run_load(host, port, accounts, c, requests_per_level)
                rows.append(summarize(scenario, c, lat, elapsed, errors))
        finally:
            svc.stop()
    return rows


def bench_url(
    host: str,
    port: int,
    accounts: list[str],
    concurrency_levels: list[int],
    requests_per_level: int = 2000,
    scenario: str = "external",
) -> list[BenchRow]:
    """Drive an already-running service instead of self-hosting."""
    rows = []
    for c in concurrency_levels:
        lat, elapsed, errors = run_load(host, port, accounts, c, requests_per_level)
        rows.append(summarize(scenario, c, lat, elapsed, errors))
    return rows


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "concurrency", "requests", "elapsed_s", "qps",
                    "p50_ms", "p95_ms", "p99_ms", "errors"])
        for r in rows:
            w.writerow([r.scenario, r.concurrency, r.requests, f"{r.elapsed_s:.4f}",
                        f"{r.qps:.1f}", f"{r.p50_ms:.3f}", f"{r.p95_ms:.3f}",
                        f"{r.p99_ms:.3f}", r.errors])


def synthetic_component_graph(n_elements: int, seed: int = 0, now: int = 1586908800) -> PropertyGraph:
    """A shared-IP account graph with roughly n_elements vertices + edges."""
    rng = random.Random(seed)
    n_vertices = n_elements // 2
    n_edges = n_elements - n_vertices
    g = PropertyGraph(risk_graph_schema())
    keys = [f"b{i:08d}" for i in range(n_vertices)]
    for k in keys:
        g.upsert_vertex("Account", k)
    for _ in range(n_edges):
        a = rng.randrange(n_vertices)
        b = rng.randrange(n_vertices)
        if a == b:
            b = (b + 1) % n_vertices
        g.insert_edge(
            "shared_ip", keys[a], keys[b],
            {"created_at": now - rng.randint(0, 3600), "delta": rng.randint(0, 30), "value": "ip"},
        )
    return g


def recompute_runtime_curve(
    element_counts: list[int], seed: int = 0, repeats: int = 3
) -> list[tuple[int, float]]:
    """Best-of-N full-recompute time per graph size, for scalability fits."""
    now = 1586908800
    cfg = ServiceConfig(window=WindowConfig(3600, 3600, 7.0))
    points = []
    for n in element_counts:
        g = synthetic_component_graph(n, seed=seed, now=now)
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            build_score_table(g, cfg, now=float(now))
            best = min(best, time.perf_counter() - t0)
        points.append((n, best))
    return points
