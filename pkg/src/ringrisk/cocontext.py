"""Time-sensitive co-context edges between accounts sharing a resource.

Two accounts that use the same context value (an IP, a device id) within a
time window get a direct undirected edge. Only time-adjacent pairs are
linked: per context value the sweep keeps the last-seen event, so k accounts
hitting one IP produce a path of k-1 edges instead of a clique. Each edge
carries the later event's timestamp and the gap between the two events, so
any effective window up to the construction window can be applied at query
time without rebuilding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .graph import Edge, PropertyGraph
from .ingest import RiskEvent


@dataclass(frozen=True)
class CoContextEdge:
    a: str
    b: str
    context_type: str
    context_value: str
    created_at: int  # the later of the two endpoint event timestamps
    delta: int  # gap in seconds between the two events


@dataclass(frozen=True)
class WindowConfig:
    store_window_s: int = 3600
    effective_window_s: int = 3600
    recency_days: float = 7.0  # math.inf disables the recency filter

    def __post_init__(self):
        if self.store_window_s < 0:
            raise ValueError("store_window_s must be >= 0")
        if not (1 <= self.effective_window_s <= self.store_window_s):
            raise ValueError(
                f"effective_window_s must be in [1, {self.store_window_s}], "
                f"got {self.effective_window_s}"
            )
        if not (self.recency_days >= 1):
            raise ValueError("recency_days must be >= 1")

    def to_dict(self) -> dict:
        rd = self.recency_days
        return {
            "store_window_s": self.store_window_s,
            "effective_window_s": self.effective_window_s,
            "recency_days": rd if rd != math.inf else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WindowConfig":
        rd = d.get("recency_days", 7.0)
        return cls(
            store_window_s=int(d.get("store_window_s", 3600)),
            effective_window_s=int(d.get("effective_window_s", 3600)),
            recency_days=math.inf if rd is None else float(rd),
        )


def build_cocontext_edges(
    events: Iterable[RiskEvent],
    context_key: str | Callable[[RiskEvent], str | None] = "ip",
    window_s: int = 3600,
    context_type: str | None = None,
) -> Iterator[CoContextEdge]:
    """Sweep a time-ordered event stream and emit time-adjacent pair edges.

    Per context value the last-seen event is tracked. A new event by a
    different account within ``window_s`` (boundary inclusive, so window 0
    still links simultaneous events) emits one edge; a repeat by the same
    account refreshes last-seen without emitting, since that account still
    holds the resource. Either way the new event becomes last-seen.
    """
    if window_s < 0:
        raise ValueError("window_s must be >= 0")
    if callable(context_key):
        selector = context_key
        ctype = context_type or "shared_context"
    else:
        key = context_key
        selector = lambda ev: ev.context(key)  # noqa: E731
        ctype = context_type or f"shared_{key}"

    last: dict[str, tuple[str, int]] = {}
    prev_ts: int | None = None
    for ev in events:
        if prev_ts is not None and ev.ts < prev_ts:
            raise ValueError(f"events not time-ordered: {ev.ts} after {prev_ts}")
        prev_ts = ev.ts
        value = selector(ev)
        if not value:
            continue
        seen = last.get(value)
        if seen is not None:
            account, ts = seen
            if account != ev.account:
                gap = ev.ts - ts
                if gap <= window_s:
                    yield CoContextEdge(account, ev.account, ctype, value, ev.ts, gap)
        last[value] = (ev.account, ev.ts)


def materialize(g: PropertyGraph, edges: Iterable[CoContextEdge]) -> int:
    """Store co-context edges as undirected typed edges with their timing.

    Every emission is kept as its own edge; merged pair strength is a view
    computed on demand, never a storage decision.
    """
    n = 0
    for e in edges:
        g.insert_edge(
            e.context_type,
            e.a,
            e.b,
            {"created_at": e.created_at, "delta": e.delta, "value": e.context_value},
        )
        n += 1
    return n


def window_predicate(cfg: WindowConfig, now: int, edge_type: str = "shared_ip") -> Callable[[Edge], bool]:
    """Query-time edge filter: recent enough and tight enough.

    True iff the edge was created within the recency horizon and its event
    gap fits the effective window. Applied by component detection so the
    window is tunable at runtime without rebuilding edges.
    """
    if cfg.recency_days == math.inf:
        cutoff = None
    else:
        cutoff = now - int(cfg.recency_days * 86400)
    eff = cfg.effective_window_s

    def pred(edge: Edge) -> bool:
        if edge.edge_type != edge_type:
            return False
        attrs = edge.attributes
        if attrs.get("delta", 0) > eff:
            return False
        if cutoff is not None and attrs.get("created_at", 0) < cutoff:
            return False
        return True

    return pred


def pair_strength(g: PropertyGraph, edge_type: str = "shared_ip") -> dict[tuple[str, str], int]:
    """Merged view: number of parallel co-context edges per account pair."""
    counts: dict[tuple[str, str], int] = {}
    for e in g.snapshot_edges(edge_type):
        pair = tuple(sorted((e.src.key, e.dst.key)))
        counts[pair] = counts.get(pair, 0) + 1
    return counts
