"""Log ingestion: declarative loading jobs and risk-event parsing.

A loading job maps CSV or JSONL records onto graph elements through ordered
field bindings. Source fields are referenced either by position ("$0", "$1",
numbering from zero) or by name ("$order_id") when the source carries field
names (JSONL, or CSV with a header row).

Malformed records never abort a job; they are collected with line numbers in
the load report.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .graph import PropertyGraph, SchemaError


class IngestError(Exception):
    pass


def parse_timestamp(value) -> int:
    """Epoch seconds from an int/float, numeric string, or ISO-8601 string."""
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        s = value.strip()
        if not s:
            raise ValueError("empty timestamp")
        try:
            return int(float(s))
        except ValueError:
            pass
        if s.endswith(("Z", "z")):
            s = s[:-1] + "+00:00"
        dt = datetime.fromisoformat(s)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"not a timestamp: {value!r}")


@dataclass(frozen=True)
class MapStatement:
    """One record-to-element mapping.

    For vertex targets the first binding must be ("key", ref); for edge
    targets the first two must be ("from", ref), ("to", ref). Remaining
    bindings name declared attributes of the target type. Attributes left
    unbound are simply not loaded (edge jobs routinely bind endpoints only).
    """

    kind: str  # "vertex" | "edge"
    target: str
    bindings: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if self.kind not in ("vertex", "edge"):
            raise IngestError(f"statement kind must be vertex|edge, got {self.kind!r}")
        heads = ("key",) if self.kind == "vertex" else ("from", "to")
        got = tuple(name for name, _ in self.bindings[: len(heads)])
        if got != heads:
            raise IngestError(
                f"{self.kind} statement for {self.target} must bind {heads} first, got {got}"
            )


@dataclass(frozen=True)
class LoadingJob:
    source_format: str  # "csv" | "jsonl"
    statements: tuple[MapStatement, ...]
    has_header: bool = False  # csv only; by-name references require it

    def __post_init__(self):
        if self.source_format not in ("csv", "jsonl"):
            raise IngestError(f"source_format must be csv|jsonl, got {self.source_format!r}")


@dataclass
class LoadReport:
    records_read: int = 0
    vertices_upserted: int = 0
    edges_inserted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    @property
    def applied(self) -> int:
        return self.records_read - len(self.rejected)


def _resolve_ref(ref: str, row, names: dict[str, int] | None, is_jsonl: bool):
    """Pull one source field. ``$<int>`` is positional, ``$name`` is by-name."""
    if not ref.startswith("$"):
        raise ValueError(f"field reference must start with $: {ref!r}")
    body = ref[1:]
    if body.isdigit():
        idx = int(body)
        if is_jsonl:
            raise ValueError(f"positional reference {ref} not valid for jsonl")
        if idx >= len(row):
            raise ValueError(f"line has {len(row)} fields, no position {idx}")
        return row[idx]
    if is_jsonl:
        if body not in row:
            raise ValueError(f"missing field {body!r}")
        return row[body]
    if names is None:
        raise ValueError(f"by-name reference {ref} requires a header row")
    if body not in names:
        raise ValueError(f"no column {body!r} in header")
    idx = names[body]
    if idx >= len(row):
        raise ValueError(f"line has {len(row)} fields, no column {body!r}")
    return row[idx]


def _coerce(kind: str, raw):
    if kind == "string":
        return raw if isinstance(raw, str) else str(raw)
    if kind == "integer":
        if isinstance(raw, bool):
            raise ValueError(f"not an integer: {raw!r}")
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "timestamp":
        return parse_timestamp(raw)
    raise ValueError(f"unknown kind {kind!r}")


def _open_lines(source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            yield from fh
        return
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def run_loading_job(g: PropertyGraph, job: LoadingJob, source) -> LoadReport:
    """Apply a loading job record by record.

    Each record is staged fully before any element is written, so a record
    either applies completely or lands in ``rejected`` untouched.
    """
    vdecl = {vt.name: dict(vt.attributes) for vt in g.schema.vertex_types}
    edecl = {et.name: dict(et.attributes) for et in g.schema.edge_types}
    for st in job.statements:
        if st.kind == "vertex" and st.target not in vdecl:
            raise SchemaError(f"loading job targets unregistered vertex type {st.target!r}")
        if st.kind == "edge" and st.target not in edecl:
            raise SchemaError(f"loading job targets unregistered edge type {st.target!r}")
        decl = vdecl[st.target] if st.kind == "vertex" else edecl[st.target]
        skip = 1 if st.kind == "vertex" else 2
        for name, _ in st.bindings[skip:]:
            if name not in decl:
                raise SchemaError(f"{st.target} has no attribute {name!r}")

    report = LoadReport()
    is_jsonl = job.source_format == "jsonl"
    names: dict[str, int] | None = None

    if is_jsonl:
        rows: Iterable = enumerate(_open_lines(source), start=1)
    else:
        reader = csv.reader(_open_lines(source))
        rows = enumerate(reader, start=1)

    header_offset = 0
    for line_no, raw in rows:
        if not is_jsonl and job.has_header and names is None and header_offset == 0:
            names = {col: i for i, col in enumerate(raw)}
            header_offset = 1
            continue
        record_no = line_no
        if is_jsonl:
            if not raw.strip():
                continue
            report.records_read += 1
            try:
                row = json.loads(raw)
                if not isinstance(row, dict):
                    raise ValueError("record is not a JSON object")
            except ValueError as exc:
                report.rejected.append((record_no, f"bad json: {exc}"))
                continue
        else:
            if raw == []:
                continue
            report.records_read += 1
            row = raw

        try:
            ops = _stage_record(job, row, names, is_jsonl, vdecl, edecl)
        except ValueError as exc:
            report.rejected.append((record_no, str(exc)))
            continue
        for op in ops:
            if op[0] == "vertex":
                _, target, key, attrs = op
                g.upsert_vertex(target, key, attrs)
                report.vertices_upserted += 1
            else:
                _, target, src, dst, attrs = op
                g.insert_edge(target, src, dst, attrs)
                report.edges_inserted += 1
    return report


def _stage_record(job, row, names, is_jsonl, vdecl, edecl):
    ops = []
    for st in job.statements:
        if st.kind == "vertex":
            decl = vdecl[st.target]
            key = _resolve_ref(st.bindings[0][1], row, names, is_jsonl)
            key = key if isinstance(key, str) else str(key)
            if not key:
                raise ValueError(f"empty key for {st.target}")
            attrs = {}
            for name, ref in st.bindings[1:]:
                attrs[name] = _coerce(decl[name], _resolve_ref(ref, row, names, is_jsonl))
            ops.append(("vertex", st.target, key, attrs))
        else:
            decl = edecl[st.target]
            src = _resolve_ref(st.bindings[0][1], row, names, is_jsonl)
            dst = _resolve_ref(st.bindings[1][1], row, names, is_jsonl)
            src = src if isinstance(src, str) else str(src)
            dst = dst if isinstance(dst, str) else str(dst)
            if not src or not dst:
                raise ValueError(f"empty endpoint for {st.target}")
            attrs = {}
            for name, ref in st.bindings[2:]:
                attrs[name] = _coerce(decl[name], _resolve_ref(ref, row, names, is_jsonl))
            ops.append(("edge", st.target, src, dst, attrs))
    return ops


# -- job configuration files -------------------------------------------


def job_from_dict(d: dict) -> LoadingJob:
    """Build a LoadingJob from its JSON configuration form.

    Example::

        {"source_format": "jsonl",
         "statements": [
           {"to_vertex": "Order", "bindings": [["key", "$order_id"],
                                               ["order_date", "$order_date"]]},
           {"to_edge": "send_bonus", "bindings": [["from", "$sendr_phone"],
                                                  ["to", "$order_id"]]}]}
    """
    stmts = []
    for s in d["statements"]:
        if "to_vertex" in s:
            kind, target = "vertex", s["to_vertex"]
        elif "to_edge" in s:
            kind, target = "edge", s["to_edge"]
        else:
            raise IngestError(f"statement needs to_vertex or to_edge: {s!r}")
        bindings = tuple((str(a), str(b)) for a, b in s["bindings"])
        stmts.append(MapStatement(kind, target, bindings))
    return LoadingJob(
        source_format=d["source_format"],
        statements=tuple(stmts),
        has_header=bool(d.get("has_header", False)),
    )


def default_jobs() -> dict[str, LoadingJob]:
    """Loading jobs for the three campaign logs plus the risk-event log."""
    orders = LoadingJob(
        source_format="jsonl",
        statements=(
            MapStatement("vertex", "Order", (("key", "$order_id"), ("order_date", "$order_date"))),
            MapStatement("edge", "send_bonus", (("from", "$sendr_phone"), ("to", "$order_id"))),
            MapStatement("edge", "recv_bonus", (("from", "$order_id"), ("to", "$recvr_phone"))),
        ),
    )
    devices = LoadingJob(
        source_format="csv",
        has_header=True,
        statements=(
            MapStatement("vertex", "IMEI", (("key", "$imei"), ("imei", "$imei"))),
            MapStatement("edge", "use_imei", (("from", "$phone_number"), ("to", "$imei"))),
        ),
    )
    referrals = LoadingJob(
        source_format="csv",
        has_header=True,
        statements=(
            MapStatement("vertex", "Account", (("key", "$recv_phone"), ("reg_time", "$recv_reg_date"))),
            MapStatement("vertex", "Account", (("key", "$sender_phone"), ("reg_time", "$sender_reg_date"))),
            MapStatement("edge", "invite", (("from", "$sender_phone"), ("to", "$recv_phone"))),
        ),
    )
    return {"orders": orders, "devices": devices, "referrals": referrals}


# -- risk events ---------------------------------------------------------


@dataclass(frozen=True)
class RiskEvent:
    ts: int
    event_type: str
    account: str
    ip: str
    extra: tuple[tuple[str, str], ...] = ()

    def context(self, key: str) -> str | None:
        if key == "ip":
            return self.ip
        return dict(self.extra).get(key)


class RiskEventStream:
    """Single-pass iterator over a risk-event JSONL source.

    Events are emitted in non-decreasing timestamp order. Out-of-order input
    is repaired inside a bounded reorder buffer; events arriving later than
    the buffer can absorb are dropped and counted, never emitted out of
    order. ``skipped`` counts unparseable or incomplete lines.
    """

    CORE_FIELDS = ("ts", "event_type", "account", "ip")

    def __init__(self, source, reorder_buffer: int = 1000):
        self._source = source
        self._buffer_size = max(0, reorder_buffer)
        self.skipped = 0
        self.dropped_stragglers = 0
        self._consumed = False

    def __iter__(self) -> Iterator[RiskEvent]:
        if self._consumed:
            raise RuntimeError("RiskEventStream is single-use")
        self._consumed = True
        heap: list[tuple[int, int, RiskEvent]] = []
        last_emitted: int | None = None
        seq = 0
        for line in _open_lines(self._source):
            if not line.strip():
                continue
            ev = self._parse_line(line)
            if ev is None:
                self.skipped += 1
                continue
            if last_emitted is not None and ev.ts < last_emitted:
                self.dropped_stragglers += 1
                continue
            heapq.heappush(heap, (ev.ts, seq, ev))
            seq += 1
            if len(heap) > self._buffer_size:
                ts, _, out = heapq.heappop(heap)
                last_emitted = ts
                yield out
        while heap:
            _, _, out = heapq.heappop(heap)
            yield out

    def _parse_line(self, line: str) -> RiskEvent | None:
        try:
            obj = json.loads(line)
        except ValueError:
            return None
        if not isinstance(obj, dict):
            return None
        try:
            ts = parse_timestamp(obj["ts"])
        except (KeyError, ValueError, TypeError):
            return None
        account = obj.get("account")
        ip = obj.get("ip")
        if not account or not ip or not isinstance(account, str) or not isinstance(ip, str):
            return None
        event_type = str(obj.get("event_type", ""))
        extra = tuple(
            sorted((k, str(v)) for k, v in obj.items() if k not in self.CORE_FIELDS)
        )
        return RiskEvent(ts, event_type, account, ip, extra)


def parse_risk_events(source, reorder_buffer: int = 1000) -> RiskEventStream:
    return RiskEventStream(source, reorder_buffer=reorder_buffer)


def replay_lines(source, rate_per_s: float | None = None) -> Iterator[str]:
    """Replay a log file line by line, optionally throttled.

    Stands in for a message broker: the semantics the pipeline needs are
    ordered delivery and replayability, which a file gives for free.
    """
    if rate_per_s is not None and rate_per_s <= 0:
        raise ValueError("rate_per_s must be positive")
    interval = 1.0 / rate_per_s if rate_per_s else 0.0
    start = time.monotonic()
    for i, line in enumerate(_open_lines(source)):
        if interval:
            due = start + i * interval
            now = time.monotonic()
            if now < due:
                time.sleep(due - now)
        yield line
