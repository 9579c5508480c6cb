"""Low-latency risk lookup service with background recomputation.

Per-account component sizes are materialized into an immutable score table.
Recomputation builds a fresh table off to the side and publishes it with a
single reference swap, so lookups never block on a recompute and never see a
half-updated table. Unknown accounts are a normal answer (found=false), not
an error: an account with no co-context edges is simply outside the graph.
"""

from __future__ import annotations

import gc
import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import unquote

import numpy as np

from .analytics import undirected_cc
from .cocontext import WindowConfig, window_predicate
from .graph import PropertyGraph


@dataclass(frozen=True)
class RiskScoreRecord:
    account: str
    cc_size: int
    updated_at: float
    risky: bool


@dataclass(frozen=True)
class ServiceConfig:
    cc_size_threshold: int = 10
    recompute_interval_s: float | None = None  # None disables the background loop
    window: WindowConfig = field(default_factory=WindowConfig)
    host: str = "127.0.0.1"
    port: int = 0  # 0 picks an ephemeral port
    edge_type: str = "shared_ip"

    def __post_init__(self):
        if self.cc_size_threshold < 2:
            raise ValueError("cc_size_threshold must be >= 2")
        if self.recompute_interval_s is not None and self.recompute_interval_s <= 0:
            raise ValueError("recompute_interval_s must be positive")


@dataclass(frozen=True)
class ScoreTable:
    records: dict[str, RiskScoreRecord]
    computed_at: float
    version: int
    window: WindowConfig
    n_components: int = 0

    def size_histogram(self) -> dict[str, int]:
        """Component count per power-of-two size bucket."""
        accounts_per_size: dict[int, int] = {}
        for rec in self.records.values():
            accounts_per_size[rec.cc_size] = accounts_per_size.get(rec.cc_size, 0) + 1
        counts: dict[str, int] = {}
        for size, n_accounts in sorted(accounts_per_size.items()):
            lo = 1 << (size.bit_length() - 1)
            hi = lo * 2 - 1
            bucket = f"{lo}-{hi}" if hi > lo else str(lo)
            counts[bucket] = counts.get(bucket, 0) + n_accounts // size
        return counts


class _Metrics:
    """Lookup counters and a rolling latency window, all thread-light."""

    def __init__(self, window: int = 20000):
        self.lookups_total = 0
        self.started = time.monotonic()
        self._latencies = deque(maxlen=window)
        self._stamps = deque(maxlen=window)
        self.last_recompute_ms: float | None = None
        self.recomputes_total = 0
        self._lock = threading.Lock()

    def observe(self, latency_s: float):
        with self._lock:
            self.lookups_total += 1
            self._latencies.append(latency_s)
            self._stamps.append(time.monotonic())

    def snapshot(self) -> dict:
        with self._lock:
            lat = list(self._latencies)
            stamps = list(self._stamps)
            total = self.lookups_total
        now = time.monotonic()
        recent = [t for t in stamps if now - t <= 10.0]
        qps = len(recent) / 10.0
        if lat:
            p50, p95, p99 = (float(x) * 1000.0 for x in np.percentile(lat, [50, 95, 99]))
        else:
            p50 = p95 = p99 = 0.0
        return {
            "lookups_total": total,
            "qps": qps,
            "latency_ms": {"p50": p50, "p95": p95, "p99": p99},
            "last_recompute_ms": self.last_recompute_ms,
            "recomputes_total": self.recomputes_total,
        }


def build_score_table(
    g: PropertyGraph,
    cfg: ServiceConfig,
    now: float | None = None,
    version: int = 1,
    cooperate=None,
) -> ScoreTable:
    """Component sizes for every account on an in-window edge.

    Accounts without in-window edges get no record: they are not part of the
    constructed graph and lookups answer found=false for them.
    """
    now = time.time() if now is None else now
    pred = window_predicate(cfg.window, int(now), cfg.edge_type)
    labeling = undirected_cc(g, pred, now=now, cooperate=cooperate)
    sizes = labeling.sizes()
    records = {}
    threshold = cfg.cc_size_threshold
    computed_at = labeling.computed_at
    for i, (account, label) in enumerate(labeling.labels.items()):
        if cooperate is not None and i % 1024 == 1023:
            cooperate()
        size = sizes[label]
        records[account] = RiskScoreRecord(account, size, computed_at, size >= threshold)
    return ScoreTable(records, computed_at, version, cfg.window, len(sizes))


class RiskService:
    """Serves per-account risk records; recomputes in the background.

    One recompute runs at a time (manual triggers and the interval loop share
    a lock); any number of lookups read the currently published table.
    """

    def __init__(self, graph: PropertyGraph, config: ServiceConfig | None = None, clock=time.time):
        self.graph = graph
        self.config = config or ServiceConfig()
        self.metrics = _Metrics()
        self.publication_log: list[tuple[int, float]] = []
        self._clock = clock
        self._published: ScoreTable | None = None
        self._recompute_lock = threading.Lock()
        self._stop = threading.Event()
        self._httpd: ThreadingHTTPServer | None = None
        self._threads: list[threading.Thread] = []

    # -- table lifecycle ----------------------------------------------

    @property
    def published(self) -> ScoreTable | None:
        return self._published

    def recompute(self, now: float | None = None) -> ScoreTable:
        with self._recompute_lock:
            started = time.perf_counter()
            prev = self._published
            # Tail-latency hygiene while the CPU-bound rebuild runs: yield in
            # small slices so lookup threads never queue behind a full
            # scheduler quantum, and keep the cycle collector from scanning
            # the table churn mid-build (score records are acyclic;
            # refcounting reclaims them).
            cooperate = self._yield_briefly if self._httpd is not None else None
            gc_was_enabled = gc.isenabled()
            gc.disable()
            try:
                table = build_score_table(
                    self.graph,
                    self.config,
                    now=self._clock() if now is None else now,
                    version=(prev.version + 1 if prev else 1),
                    cooperate=cooperate,
                )
            finally:
                if gc_was_enabled:
                    gc.enable()
            self._published = table  # single reference swap publishes atomically
            self.publication_log.append((table.version, table.computed_at))
            self.metrics.last_recompute_ms = (time.perf_counter() - started) * 1000.0
            self.metrics.recomputes_total += 1
            return table

    @staticmethod
    def _yield_briefly():
        time.sleep(0.0002)

    def lookup(self, account: str) -> dict:
        table = self._published
        base = {
            "account": account,
            "computed_at": table.computed_at if table else None,
            "window": table.window.to_dict() if table else self.config.window.to_dict(),
        }
        rec = table.records.get(account) if table else None
        if rec is None:
            base.update({"found": False, "cc_size": 0, "updated_at": None, "risky": False})
        else:
            base.update(
                {
                    "found": True,
                    "cc_size": rec.cc_size,
                    "updated_at": rec.updated_at,
                    "risky": rec.risky,
                }
            )
        return base

    # -- service lifecycle --------------------------------------------

    def start(self) -> tuple[str, int]:
        """Recompute once, bind the HTTP endpoint, start the interval loop."""
        if self._httpd is not None:
            raise RuntimeError("service already started")
        self.recompute()
        # the graph and first table are long-lived; parking them outside the
        # cycle collector keeps collections cheap while serving
        gc.collect()
        gc.freeze()
        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer((self.config.host, self.config.port), handler)
        self._httpd.daemon_threads = True
        t = threading.Thread(target=self._httpd.serve_forever, daemon=True, name="ringrisk-http")
        t.start()
        self._threads.append(t)
        if self.config.recompute_interval_s:
            loop = threading.Thread(target=self._recompute_loop, daemon=True, name="ringrisk-recompute")
            loop.start()
            self._threads.append(loop)
        host, port = self._httpd.server_address[:2]
        return str(host), int(port)

    def _recompute_loop(self):
        interval = self.config.recompute_interval_s
        while not self._stop.wait(interval):
            self.recompute()

    def stop(self):
        self._stop.set()
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
            self._httpd = None

    def metrics_snapshot(self) -> dict:
        snap = self.metrics.snapshot()
        table = self._published
        snap["computed_at"] = table.computed_at if table else None
        snap["version"] = table.version if table else 0
        snap["component_size_histogram"] = table.size_histogram() if table else {}
        return snap


def _valid_account(account: str) -> bool:
    if not account or len(account) > 256:
        return False
    return not any(c.isspace() or ord(c) < 32 for c in account)


def _make_handler(service: RiskService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        disable_nagle_algorithm = True

        def _send(self, status: int, payload: dict):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):  # noqa: N802 (http.server naming)
            if self.path.startswith("/risk/"):
                started = time.perf_counter()
                account = unquote(self.path[len("/risk/"):])
                if not _valid_account(account):
                    self._send(400, {"error": "malformed account id"})
                    return
                payload = service.lookup(account)
                service.metrics.observe(time.perf_counter() - started)
                self._send(200, payload)
            elif self.path == "/health":
                table = service.published
                self._send(
                    200,
                    {
                        "status": "ok",
                        "version": table.version if table else 0,
                        "accounts": len(table.records) if table else 0,
                    },
                )
            elif self.path == "/metrics":
                self._send(200, service.metrics_snapshot())
            else:
                self._send(404, {"error": "not found"})

        def do_POST(self):  # noqa: N802
            if self.path == "/admin/recompute":
                started = time.perf_counter()
                table = service.recompute()
                self._send(
                    200,
                    {
                        "computed_at": table.computed_at,
                        "version": table.version,
                        "duration_ms": (time.perf_counter() - started) * 1000.0,
                        "accounts": len(table.records),
                        "components": table.n_components,
                    },
                )
            else:
                self._send(404, {"error": "not found"})

        def log_message(self, *args):  # quiet by default
            pass

    return Handler
