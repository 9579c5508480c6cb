"""End-to-end wiring: logs in, graphs up, reports out.

All stages take explicit inputs and return plain results, so the CLI, the
sweep driver and the tests all run the same code path.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .analytics import (
    ComponentLabeling,
    ComponentProfile,
    RuleOutcome,
    RuleThresholds,
    dag_cc,
    evaluate_rules,
    per_account_stats,
    profile_components,
    undirected_cc,
)
from .cocontext import WindowConfig, build_cocontext_edges, materialize, window_predicate
from .graph import PropertyGraph, risk_graph_schema
from .ingest import LoadReport, default_jobs, parse_risk_events, run_loading_job
from .synth import CampaignFiles, GroundTruth, precision_recall


@dataclass
class CampaignPaths:
    orders: Path
    devices: Path
    referrals: Path
    events: Path | None = None

    @classmethod
    def in_dir(cls, d) -> "CampaignPaths":
        d = Path(d)
        events = d / "events.jsonl"
        return cls(
            orders=d / "orders.jsonl",
            devices=d / "devices.csv",
            referrals=d / "referrals.csv",
            events=events if events.exists() else None,
        )

    @classmethod
    def from_files(cls, files: CampaignFiles) -> "CampaignPaths":
        return cls(files.orders, files.devices, files.referrals, files.events)


def load_campaign(paths: CampaignPaths, g: PropertyGraph | None = None) -> tuple[PropertyGraph, dict[str, LoadReport]]:
    """Load the three campaign logs with the stock loading jobs."""
    g = g or PropertyGraph(risk_graph_schema())
    jobs = default_jobs()
    reports = {}
    for name, source in (("orders", paths.orders), ("devices", paths.devices), ("referrals", paths.referrals)):
        reports[name] = run_loading_job(g, jobs[name], source)
    return g, reports


def build_shared_ip_edges(
    g: PropertyGraph, events_path, store_window_s: int = 3600, reorder_buffer: int = 1000
) -> tuple[int, dict]:
    """Parse the risk-event log and materialize shared-IP edges."""
    stream = parse_risk_events(events_path, reorder_buffer=reorder_buffer)
    edges = build_cocontext_edges(iter(stream), "ip", store_window_s)
    inserted = materialize(g, edges)
    return inserted, {"skipped": stream.skipped, "dropped_stragglers": stream.dropped_stragglers}


@dataclass
class DetectionResult:
    labeling: ComponentLabeling
    profiles: list[ComponentProfile]
    outcomes: list[RuleOutcome]

    def flagged(self, rule_id: str = "i") -> frozenset[str]:
        for o in self.outcomes:
            if o.rule_id == rule_id:
                return o.flagged_accounts
        raise KeyError(rule_id)


def detect_invitation_fraud(
    g: PropertyGraph, thresholds: RuleThresholds | None = None, now: float | None = None
) -> DetectionResult:
    """Invitation-graph pipeline: components, profiles, rules a through j."""
    labeling = dag_cc(g, "invite", now=now)
    profiles = profile_components(g, labeling)
    outcomes = evaluate_rules(g, profiles, per_account_stats(g), thresholds)
    return DetectionResult(labeling, profiles, outcomes)


def component_size_flags(
    g: PropertyGraph, window: WindowConfig, cc_size_threshold: int, now: int
) -> tuple[set[str], ComponentLabeling]:
    """Accounts whose in-window shared-IP component meets the size cutoff."""
    labeling = undirected_cc(g, window_predicate(window, now), now=now)
    sizes = labeling.sizes()
    flagged = {a for a, label in labeling.labels.items() if sizes[label] >= cc_size_threshold}
    return flagged, labeling


def run_detection(
    paths: CampaignPaths,
    thresholds: RuleThresholds | None = None,
    window: WindowConfig | None = None,
    cc_size_threshold: int = 10,
    now: int | None = None,
    store_window_s: int = 3600,
) -> tuple[DetectionResult, set[str], PropertyGraph]:
    """Both applications over one log set.

    Returns the invitation-rule result, the combined flagged set (rule i
    union the component-size flags when an event log is present), and the
    loaded graph.
    """
    g, _ = load_campaign(paths)
    result = detect_invitation_fraud(g, thresholds)
    flagged = set(result.flagged("i"))
    if paths.events is not None:
        build_shared_ip_edges(g, paths.events, store_window_s)
        win = window or WindowConfig(store_window_s, min(30, store_window_s))
        if now is None:
            latest = max(
                (e.attributes.get("created_at", 0) for e in g.snapshot_edges("shared_ip")),
                default=0,
            )
            now = latest
        size_flags, _ = component_size_flags(g, win, cc_size_threshold, now)
        flagged |= size_flags
    return result, flagged, g


def sweep(
    paths: CampaignPaths,
    truth: GroundTruth,
    window_sizes: list[int],
    cc_thresholds: list[int],
    now: int | None = None,
    store_window_s: int | None = None,
) -> list[dict]:
    """One component pass per window size, scored per size threshold.

    Edges are built once at the widest window and narrowed by the per-edge
    delta at query time, exactly as the serving path does.
    """
    if paths.events is None:
        raise ValueError("sweep needs an event log")
    store = store_window_s or max(window_sizes)
    g = PropertyGraph(risk_graph_schema())
    build_shared_ip_edges(g, paths.events, store)
    if now is None:
        now = max(
            (e.attributes.get("created_at", 0) for e in g.snapshot_edges("shared_ip")), default=0
        )
    rows = []
    for w in window_sizes:
        win = WindowConfig(store, w, math.inf)
        pred = window_predicate(win, now)
        edge_count = len(g.snapshot_edges("shared_ip", pred))
        labeling = undirected_cc(g, pred, now=now)
        sizes = labeling.sizes()
        hist: dict[int, int] = {}
        for size in sizes.values():
            hist[size] = hist.get(size, 0) + 1
        for t in cc_thresholds:
            flagged = {a for a, label in labeling.labels.items() if sizes[label] >= t}
            scores = precision_recall(flagged, truth)
            rows.append(
                {
                    "window_s": w,
                    "cc_size_threshold": t,
                    "precision": scores["precision"],
                    "recall": scores["recall"],
                    "f1": scores["f1"],
                    "edge_count": edge_count,
                    "account_count": len(labeling.labels),
                    "cc_size_histogram": json.dumps(
                        {str(k): v for k, v in sorted(hist.items())}, separators=(",", ":")
                    ),
                }
            )
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    cols = ["window_s", "cc_size_threshold", "precision", "recall", "f1",
            "edge_count", "account_count", "cc_size_histogram"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([
                row["window_s"], row["cc_size_threshold"],
                f"{row['precision']:.6f}", f"{row['recall']:.6f}", f"{row['f1']:.6f}",
                row["edge_count"], row["account_count"], row["cc_size_histogram"],
            ])


def edge_counts_by_prefix(events_path, window_s: int, fractions=(0.25, 0.5, 0.75, 1.0)) -> list[tuple[int, int]]:
    """(event count, co-context edge count) over stream prefixes at one window."""
    events = list(parse_risk_events(events_path))
    points = []
    for frac in fractions:
        n = int(len(events) * frac)
        edges = sum(1 for _ in build_cocontext_edges(events[:n], "ip", window_s))
        points.append((n, edges))
    return points
