"""Connected components over account graphs, component profiling, and
threshold rules.

Two component flavors are provided. ``dag_cc`` mirrors ancestor propagation
over a directed acyclic invitation graph: vertices with no inviter and at
least one invitee seed their own key as a label, labels flow to descendants,
and every vertex keeps the maximum label it ever sees. ``undirected_cc`` is
plain union-find over whichever edges pass a predicate, labeled by minimum
member key. On invitation forests the two group accounts identically; on
DAGs with shared descendants they intentionally differ.

Profiles carry four statistics per component: invitation depth, accounts per
distinct device, the fraction of bonus orders paid out to someone other than
the sender, and the Gini index of invitee counts across inviters.
"""

from __future__ import annotations

import csv
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from .graph import Edge, PropertyGraph, VertexRef


class AnalyticsError(Exception):
    pass


class CycleError(AnalyticsError):
    def __init__(self, vertex: str):
        super().__init__(f"invite subgraph contains a cycle through {vertex!r}")
        self.vertex = vertex


@dataclass
class ComponentLabeling:
    labels: dict[str, str]
    computed_at: float
    vertex_type: str = "Account"
    # grouping is derived once; labelings are never mutated after detection
    _components: dict[str, frozenset[str]] | None = field(default=None, repr=False, compare=False)

    def components(self) -> dict[str, frozenset[str]]:
        if self._components is None:
            groups: dict[str, set[str]] = {}
            for key, label in self.labels.items():
                groups.setdefault(label, set()).add(key)
            self._components = {label: frozenset(members) for label, members in groups.items()}
        return self._components

    def sizes(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for label in self.labels.values():
            counts[label] = counts.get(label, 0) + 1
        return counts


def _invite_adjacency(g: PropertyGraph, edge_type: str):
    out_adj: dict[str, list[str]] = {}
    in_deg: dict[str, int] = {}
    for e in g.snapshot_edges(edge_type):
        s, d = e.src.key, e.dst.key
        out_adj.setdefault(s, []).append(d)
        out_adj.setdefault(d, [])
        in_deg[d] = in_deg.get(d, 0) + 1
        in_deg.setdefault(s, in_deg.get(s, 0))
    return out_adj, in_deg


def _find_cycle_vertex(out_adj, remaining: set[str]) -> str:
    # walk forward inside the unresolved set until a vertex repeats
    start = min(remaining)
    seen: dict[str, None] = {}
    v = start
    while v not in seen:
        seen[v] = None
        v = min(w for w in out_adj[v] if w in remaining)
    return v


def dag_cc(g: PropertyGraph, edge_type: str = "invite", now: float | None = None) -> ComponentLabeling:
    """Label components of a directed acyclic subgraph by max-root propagation.

    Roots are vertices with zero incoming and at least one outgoing edge of
    the given type. Vertices touched by no edge stay unlabeled. Cyclic input
    is rejected outright, naming one vertex on a cycle.
    """
    et = next((t for t in g.schema.edge_types if t.name == edge_type), None)
    if et is None or not et.directed:
        raise AnalyticsError(f"{edge_type!r} is not a registered directed edge type")
    out_adj, in_deg = _invite_adjacency(g, edge_type)

    # Kahn's algorithm purely as a cycle check
    deg = dict(in_deg)
    queue = deque(v for v, d in deg.items() if d == 0)
    processed = 0
    while queue:
        u = queue.popleft()
        processed += 1
        for v in out_adj[u]:
            deg[v] -= 1
            if deg[v] == 0:
                queue.append(v)
    if processed < len(out_adj):
        remaining = {v for v, d in deg.items() if d > 0}
        raise CycleError(_find_cycle_vertex(out_adj, remaining))

    labels: dict[str, str] = {}
    frontier: set[str] = set()
    for v in out_adj:
        if in_deg[v] == 0 and out_adj[v]:
            labels[v] = v
            frontier.add(v)
    while frontier:
        nxt: set[str] = set()
        for u in frontier:
            lu = labels[u]
            for v in out_adj[u]:
                if labels.get(v, "") < lu:
                    labels[v] = lu
                    nxt.add(v)
        frontier = nxt
    return ComponentLabeling(labels, now if now is not None else time.time())


class _UnionFind:
    __slots__ = ("parent", "size")

    def __init__(self):
        self.parent: dict[str, str] = {}
        self.size: dict[str, int] = {}

    def add(self, x: str):
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x: str) -> str:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: str, b: str):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def undirected_cc(
    g: PropertyGraph,
    edge_predicate: Callable[[Edge], bool] | None = None,
    vertex_type: str = "Account",
    now: float | None = None,
    cooperate: Callable[[], None] | None = None,
) -> ComponentLabeling:
    """Union-find components over account-to-account edges passing a filter.

    Directedness is ignored. Every account incident to an in-scope edge is
    labeled with the minimum key of its component, which makes labels
    canonical and runs deterministic. ``cooperate``, when given, is invoked
    periodically so a serving process can yield mid-computation; it never
    changes the result.
    """
    uf = _UnionFind()
    for i, e in enumerate(g.snapshot_edges(None, edge_predicate)):
        if cooperate is not None and i % 256 == 255:
            cooperate()
        if e.src.type_name != vertex_type or e.dst.type_name != vertex_type:
            continue
        uf.add(e.src.key)
        uf.add(e.dst.key)
        uf.union(e.src.key, e.dst.key)
    best: dict[str, str] = {}
    for i, key in enumerate(uf.parent):
        if cooperate is not None and i % 1024 == 1023:
            cooperate()
        root = uf.find(key)
        cur = best.get(root)
        if cur is None or key < cur:
            best[root] = key
    labels = {key: best[uf.find(key)] for key in uf.parent}
    return ComponentLabeling(labels, now if now is not None else time.time(), vertex_type)


def cc_depth(g: PropertyGraph, labeling: ComponentLabeling, label: str, edge_type: str = "invite") -> int:
    """Longest directed path (in hops) from any root inside one component."""
    members = labeling.components().get(label)
    if members is None:
        raise AnalyticsError(f"unknown component label {label!r}")
    adj: dict[str, list[str]] = {m: [] for m in members}
    in_deg: dict[str, int] = {m: 0 for m in members}
    for m in members:
        ref = VertexRef(labeling.vertex_type, m)
        for e in g.incident_edges(ref, edge_type, "out"):
            t = e.dst.key
            if t in in_deg:
                adj[m].append(t)
                in_deg[t] += 1
    depth = {m: 0 for m in members}
    queue = deque(m for m in members if in_deg[m] == 0)
    best = 0
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if depth[u] + 1 > depth[v]:
                depth[v] = depth[u] + 1
                best = max(best, depth[v])
            in_deg[v] -= 1
            if in_deg[v] == 0:
                queue.append(v)
    return best


def shared_device_ratio(g: PropertyGraph, members: Iterable[str], vertex_type: str = "Account") -> float:
    """Accounts per distinct device across the member set; 0 when deviceless."""
    members = list(members)
    imeis: set[str] = set()
    for m in members:
        ref = VertexRef(vertex_type, m)
        if not g.has_vertex(ref):
            continue
        for e in g.incident_edges(ref, "use_imei"):
            imeis.add(e.other(ref).key)
    if not imeis:
        return 0.0
    return len(members) / len(imeis)


def non_self_order_ratio(
    g: PropertyGraph, members: Iterable[str], vertex_type: str = "Account"
) -> tuple[int, float]:
    """(bonus orders sent by members, fraction of them paid to someone else).

    Orders with no receiver on record are counted as sent but excluded from
    the ratio on both sides.
    """
    member_set = set(members)
    sent_orders: set[str] = set()
    with_receiver = 0
    non_self = 0
    for m in member_set:
        ref = VertexRef(vertex_type, m)
        if not g.has_vertex(ref):
            continue
        for e in g.incident_edges(ref, "send_bonus", "out"):
            order_ref = e.dst
            if order_ref.key in sent_orders:
                continue
            sent_orders.add(order_ref.key)
            receivers = g.neighbors(order_ref, "recv_bonus", "out")
            if not receivers:
                continue
            with_receiver += 1
            if any(r.key != m for r in receivers):
                non_self += 1
    ratio = non_self / with_receiver if with_receiver else 0.0
    return len(sent_orders), ratio


def gini_index(counts: Iterable[float]) -> float:
    """Gini index of a frequency distribution, in [0, 1 - 1/n].

    Equals the mean absolute difference between all value pairs divided by
    twice the mean. An all-zero or single-element input has no inequality.
    """
    xs = sorted(counts)
    n = len(xs)
    if n == 0:
        raise ValueError("gini_index of an empty sequence")
    total = math.fsum(xs)
    if total == 0:
        return 0.0
    weighted = math.fsum((2 * i - n + 1) * x for i, x in enumerate(xs))
    # mathematically >= 0; guard against float dust on near-constant input
    return max(0.0, weighted / (n * total))


@dataclass(frozen=True)
class ComponentProfile:
    label: str
    members: frozenset[str]
    size: int
    depth: int
    bonus_sent: int
    non_self_order_ratio: float
    shared_device_ratio: float
    gini: float


def profile_components(
    g: PropertyGraph, labeling: ComponentLabeling, edge_type: str = "invite"
) -> list[ComponentProfile]:
    """All four statistics for every component, ordered by label.

    The Gini population is the invitee count of each member that invited at
    least one account; members with no invitees do not enter it.
    """
    profiles = []
    for label, members in sorted(labeling.components().items()):
        invitee_counts = []
        for m in members:
            d = g.degree(VertexRef(labeling.vertex_type, m), edge_type, "out")
            if d > 0:
                invitee_counts.append(d)
        bonus_sent, ratio = non_self_order_ratio(g, members, labeling.vertex_type)
        profiles.append(
            ComponentProfile(
                label=label,
                members=members,
                size=len(members),
                depth=cc_depth(g, labeling, label, edge_type),
                bonus_sent=bonus_sent,
                non_self_order_ratio=ratio,
                shared_device_ratio=shared_device_ratio(g, members, labeling.vertex_type),
                gini=gini_index(invitee_counts) if invitee_counts else 0.0,
            )
        )
    return profiles


def per_account_stats(g: PropertyGraph, vertex_type: str = "Account") -> dict[str, dict[str, int]]:
    """One-step statistics needing no component detection.

    ``accounts_on_same_imei``: over the account's devices, the largest number
    of accounts registered on one of them (0 with no device record).
    ``senders_to_me``: distinct accounts whose bonus order paid out to this
    account.
    """
    imei_accounts: dict[str, set[str]] = {}
    account_imeis: dict[str, set[str]] = {}
    for e in g.snapshot_edges("use_imei"):
        acct, imei = (e.src, e.dst) if e.src.type_name == vertex_type else (e.dst, e.src)
        imei_accounts.setdefault(imei.key, set()).add(acct.key)
        account_imeis.setdefault(acct.key, set()).add(imei.key)

    order_senders: dict[str, set[str]] = {}
    for e in g.snapshot_edges("send_bonus"):
        order_senders.setdefault(e.dst.key, set()).add(e.src.key)
    senders_to: dict[str, set[str]] = {}
    for e in g.snapshot_edges("recv_bonus"):
        senders = order_senders.get(e.src.key)
        if senders:
            senders_to.setdefault(e.dst.key, set()).update(senders)

    stats = {}
    for key in g.vertices(vertex_type):
        imeis = account_imeis.get(key)
        on_same = max((len(imei_accounts[i]) for i in imeis), default=0) if imeis else 0
        stats[key] = {
            "accounts_on_same_imei": on_same,
            "senders_to_me": len(senders_to.get(key, ())),
        }
    return stats


@dataclass(frozen=True)
class RuleThresholds:
    depth_gt: int = 5
    bonus_sent_gt: int = 10
    non_self_ratio_gt: float = 0.5
    cc_size_ge: int = 30
    device_ratio_gt: float = 2.0
    gini_lt: float = 0.1
    accounts_per_imei_ge: int = 3
    senders_per_receiver_ge: int = 3

    @classmethod
    def from_dict(cls, d: dict) -> "RuleThresholds":
        return replace(cls(), **{k: v for k, v in d.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class RuleOutcome:
    rule_id: str
    flagged_accounts: frozenset[str]
    flagged_orders: frozenset[str]
    flagged_cc_count: int | None  # None for rules that use no component


RULE_IDS = ("a", "b", "c", "d", "e", "f", "g", "h", "i", "j")


def evaluate_rules(
    g: PropertyGraph,
    profiles: list[ComponentProfile],
    stats: dict[str, dict[str, int]] | None = None,
    thresholds: RuleThresholds | None = None,
) -> list[RuleOutcome]:
    """Apply the detection rules and their composites.

    a-d flag whole components by profile thresholds; e-f flag individual
    accounts by one-step statistics; g = a+b+c+d, h = e+f, i = g+h and
    j = g+h-d combine the flagged account sets. Flagged orders are always
    the bonus orders sent by the flagged accounts.
    """
    th = thresholds or RuleThresholds()
    if stats is None:
        stats = per_account_stats(g)

    sent_by: dict[str, set[str]] = {}
    for e in g.snapshot_edges("send_bonus"):
        sent_by.setdefault(e.src.key, set()).add(e.dst.key)

    def orders_of(accounts: frozenset[str]) -> frozenset[str]:
        orders: set[str] = set()
        for a in accounts:
            orders.update(sent_by.get(a, ()))
        return frozenset(orders)

    cc_rules = {
        "a": lambda p: p.depth > th.depth_gt,
        "b": lambda p: p.bonus_sent > th.bonus_sent_gt and p.non_self_order_ratio > th.non_self_ratio_gt,
        "c": lambda p: p.size >= th.cc_size_ge and p.shared_device_ratio > th.device_ratio_gt,
        "d": lambda p: p.size >= th.cc_size_ge and p.gini < th.gini_lt,
    }
    accounts: dict[str, frozenset[str]] = {}
    cc_labels: dict[str, set[str]] = {}
    for rule_id, hit in cc_rules.items():
        flagged = [p for p in profiles if hit(p)]
        accounts[rule_id] = frozenset().union(*(p.members for p in flagged)) if flagged else frozenset()
        cc_labels[rule_id] = {p.label for p in flagged}

    accounts["e"] = frozenset(
        a for a, s in stats.items() if s["accounts_on_same_imei"] >= th.accounts_per_imei_ge
    )
    accounts["f"] = frozenset(
        a for a, s in stats.items() if s["senders_to_me"] >= th.senders_per_receiver_ge
    )
    accounts["g"] = accounts["a"] | accounts["b"] | accounts["c"] | accounts["d"]
    accounts["h"] = accounts["e"] | accounts["f"]
    accounts["i"] = accounts["g"] | accounts["h"]
    accounts["j"] = (accounts["g"] | accounts["h"]) - accounts["d"]

    cc_counts: dict[str, int | None] = {r: len(cc_labels[r]) for r in cc_rules}
    cc_counts["g"] = len(cc_labels["a"] | cc_labels["b"] | cc_labels["c"] | cc_labels["d"])
    for r in ("e", "f", "h", "i", "j"):
        cc_counts[r] = None

    return [
        RuleOutcome(r, accounts[r], orders_of(accounts[r]), cc_counts[r]) for r in RULE_IDS
    ]


def write_rule_outcomes_jsonl(outcomes: list[RuleOutcome], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for o in outcomes:
            fh.write(
                json.dumps(
                    {
                        "rule": o.rule_id,
                        "account_count": len(o.flagged_accounts),
                        "order_count": len(o.flagged_orders),
                        "cc_count": o.flagged_cc_count,
                        "accounts": sorted(o.flagged_accounts),
                        "orders": sorted(o.flagged_orders),
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def write_profiles_csv(profiles: list[ComponentProfile], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["label", "size", "depth", "bonus_sent", "non_self_order_ratio",
             "shared_device_ratio", "gini", "members"]
        )
        for p in profiles:
            w.writerow(
                [p.label, p.size, p.depth, p.bonus_sent,
                 f"{p.non_self_order_ratio:.6f}", f"{p.shared_device_ratio:.6f}",
                 f"{p.gini:.6f}", ";".join(sorted(p.members))]
            )
