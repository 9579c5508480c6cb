"""Acceptance gate: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s`. Expected values come from
independent oracles computed inside this module (reachability closure,
pairwise sweeps, exhaustive enumeration), never from the code under test.
"""

import json
import random
import threading
import time
from http.client import HTTPConnection

import pytest

from ringrisk.analytics import (
    cc_depth,
    dag_cc,
    evaluate_rules,
    gini_index,
    per_account_stats,
    profile_components,
    undirected_cc,
    write_profiles_csv,
    write_rule_outcomes_jsonl,
)
from ringrisk.bench import recompute_runtime_curve, synthetic_component_graph
from ringrisk.cocontext import WindowConfig, build_cocontext_edges
from ringrisk.graph import PropertyGraph, risk_graph_schema
from ringrisk.ingest import RiskEvent
from ringrisk.pipeline import (
    CampaignPaths,
    edge_counts_by_prefix,
    load_campaign,
    run_detection,
    sweep,
)
from ringrisk.service import RiskService, ServiceConfig
from ringrisk.synth import (
    CampaignSpec,
    claimable_bonuses,
    generate,
    linear_r2,
    precision_recall,
    read_referral_pairs,
    standard_fraud_groups,
    strategy_referrals,
    write_strategy_referrals,
)


def ok(criterion: int, detail: str):
    print(f"[acceptance] criterion {criterion:2d}: PASS  {detail}")


# -- shared big campaign (criteria 7, 8, 9) ---------------------------------

BIG_SPEC = CampaignSpec(
    seed=42,
    n_normal_accounts=50_000,
    fraud_groups=standard_fraud_groups(2),
    ip_collision_groups=8,
)

_timings: dict[str, float] = {}


@pytest.fixture(scope="module")
def big_campaign(tmp_path_factory):
    out = tmp_path_factory.mktemp("big-campaign")
    t0 = time.perf_counter()
    files, truth = generate(BIG_SPEC, out)
    _timings["generate"] = time.perf_counter() - t0
    return files, truth


@pytest.fixture(scope="module")
def big_detection(big_campaign):
    files, truth = big_campaign
    t0 = time.perf_counter()
    result, flagged, graph = run_detection(CampaignPaths.from_files(files))
    _timings["detect"] = time.perf_counter() - t0
    return result, flagged, graph


# -- criterion 1 --------------------------------------------------------------


def test_c01_cocontext_worked_example():
    nine, fifteen = 9 * 3600, 15 * 3600
    events = [
        RiskEvent(nine, "login", "u1", "9.9.9.9"),
        RiskEvent(fifteen, "login", "u2", "9.9.9.9"),
        RiskEvent(fifteen + 1, "login", "u3", "9.9.9.9"),
    ]
    edges = list(build_cocontext_edges(events, "ip", 30))
    assert len(edges) == 1
    (edge,) = edges
    assert (edge.a, edge.b) == ("u2", "u3")
    assert edge.delta == 1
    assert edge.created_at == fifteen + 1
    assert not any(e.a == "u1" or e.b == "u1" for e in edges)
    ok(1, "one (u2,u3) edge, delta 1s, created_at 15:00:01; no (u1,u2) edge")


# -- criterion 2 --------------------------------------------------------------


def _oracle_pairs(events, window):
    by_ctx = {}
    for e in events:
        by_ctx.setdefault(e.ip, []).append(e)
    out = []
    per_ctx = {}
    for ctx, seq in by_ctx.items():
        for prev, cur in zip(seq, seq[1:]):
            if prev.account != cur.account and cur.ts - prev.ts <= window:
                out.append((prev.account, cur.account, ctx, cur.ts, cur.ts - prev.ts))
                per_ctx[ctx] = per_ctx.get(ctx, 0) + 1
    return sorted(out), per_ctx


def test_c02_edge_reduction_bound_and_oracle():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(0, 200)
        contexts = [f"ip{i}" for i in range(rng.randint(1, 10))]
        accounts = [f"u{i}" for i in range(rng.randint(1, 15))]
        ts = 0
        events = []
        for _ in range(n):
            ts += rng.randint(0, 60)
            events.append(RiskEvent(ts, "e", rng.choice(accounts), rng.choice(contexts)))
        window = rng.choice([0, 10, 30, 120])
        built = sorted(
            (e.a, e.b, e.context_value, e.created_at, e.delta)
            for e in build_cocontext_edges(events, "ip", window)
        )
        want, per_ctx = _oracle_pairs(events, window)
        assert built == want
        distinct = {e.ip for e in events}
        assert len(built) <= max(0, len(events) - len(distinct))
        built_per_ctx = {}
        for _, _, ctx, _, _ in built:
            built_per_ctx[ctx] = built_per_ctx.get(ctx, 0) + 1
        assert built_per_ctx == per_ctx
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    ok(2, f"1000 random streams match the adjacent-pair oracle in {elapsed:.1f}s")


# -- criterion 3 --------------------------------------------------------------


def _closure_components(n, edges):
    adj = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    incident = {v for a, b in edges for v in (a, b)}
    groups = set()
    seen = set()
    for start in incident:
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for w in adj[v]:
                if w not in comp:
                    comp.add(w)
                    frontier.append(w)
        seen |= comp
        groups.add(frozenset(comp))
    return groups


def test_c03_undirected_cc_matches_reachability_oracle():
    rng = random.Random(3)
    t0 = time.perf_counter()
    for _ in range(10_000):
        n = rng.randint(2, 12)
        edges = []
        for _ in range(rng.randint(0, 16)):
            a, b = rng.randrange(n), rng.randrange(n)
            if a != b:
                edges.append((a, b))
        g = PropertyGraph(risk_graph_schema())
        for a, b in edges:
            g.insert_edge("shared_ip", f"v{a:02d}", f"v{b:02d}",
                          {"created_at": 0, "delta": 0, "value": "x"})
        got = set(undirected_cc(g).components().values())
        want = {frozenset(f"v{i:02d}" for i in grp) for grp in _closure_components(n, edges)}
        assert got == want
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    ok(3, f"10,000 random graphs match reachability closure in {elapsed:.1f}s")


# -- criterion 4 --------------------------------------------------------------


def test_c04_dag_cc_forest_semantics():
    rng = random.Random(4)
    t0 = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(2, 500)
        edges = []
        for child in range(1, n):
            if rng.random() < 0.7:
                edges.append((f"n{rng.randrange(child):04d}", f"n{child:04d}"))
        if not edges:
            continue
        g = PropertyGraph(risk_graph_schema())
        for a, b in edges:
            g.insert_edge("invite", a, b)
        dag = dag_cc(g)
        und = undirected_cc(g, lambda e: e.edge_type == "invite")
        assert set(dag.components().values()) == set(und.components().values())
        receivers = {b for _, b in edges}
        for label, members in dag.components().items():
            roots = [m for m in members if m not in receivers]
            assert roots == [label]
    elapsed = time.perf_counter() - t0

    keys = [f"c{i:03d}" for i in range(61)]
    g = PropertyGraph(risk_graph_schema())
    for a, b in zip(keys, keys[1:]):
        g.insert_edge("invite", a, b)
    lab = dag_cc(g)
    assert cc_depth(g, lab, keys[0]) == 60
    ok(4, f"1000 forests grouped and rooted identically in {elapsed:.1f}s; 61-chain depth 60")


# -- criterion 5 --------------------------------------------------------------


def test_c05_gini_matches_pairwise_formula():
    rng = random.Random(5)
    t0 = time.perf_counter()
    for _ in range(10_000):
        n = rng.randint(1, 50)
        xs = [rng.uniform(0, 100) if rng.random() < 0.9 else 0.0 for _ in range(n)]
        mean = sum(xs) / n
        want = (
            0.0
            if mean == 0
            else sum(abs(a - b) for a in xs for b in xs) / (2 * n * n * mean)
        )
        assert abs(gini_index(xs) - want) <= 1e-9
        c = rng.uniform(0.01, 50)
        assert abs(gini_index([c * x for x in xs]) - gini_index(xs)) <= 1e-9
    for k in (1, 2, 7, 50):
        assert gini_index([13.7] * k) == 0.0
    elapsed = time.perf_counter() - t0
    ok(5, f"10,000 vectors within 1e-9 of the pairwise oracle in {elapsed:.1f}s")


# -- criterion 6 --------------------------------------------------------------


def test_c06_strategy_bonus_counts(tmp_path):
    counts = []
    for strategy in (1, 2, 3):
        pairs = strategy_referrals(strategy, 10)
        generated = claimable_bonuses(pairs, 3)
        path = tmp_path / f"s{strategy}.csv"
        write_strategy_referrals(strategy, path)
        recounted = claimable_bonuses(read_referral_pairs(path), 3)
        assert generated == recounted
        counts.append(generated)
    assert counts == [2, 3, 3]
    ok(6, "strategies claim exactly 2, 3, 3 bonuses, recounted from the emitted log")


# -- criterion 7 --------------------------------------------------------------


def test_c07_rule_set_algebra(big_detection):
    result, _, _ = big_detection
    acc = {o.rule_id: o.flagged_accounts for o in result.outcomes}
    assert acc["g"] == acc["a"] | acc["b"] | acc["c"] | acc["d"]
    assert acc["h"] == acc["e"] | acc["f"]
    assert acc["i"] == acc["g"] | acc["h"]
    assert acc["j"] == (acc["g"] | acc["h"]) - acc["d"]
    ok(7, f"g/h/i/j identities hold element-wise over {len(acc['i'])} flagged accounts")


# -- criterion 8 --------------------------------------------------------------


def test_c08_planted_fraud_recovery(big_campaign, big_detection):
    _, truth = big_campaign
    _, flagged, _ = big_detection
    scores = precision_recall(flagged, truth)
    runtime = _timings["generate"] + _timings["detect"]
    assert scores["precision"] >= 0.95
    assert scores["recall"] >= 0.90
    assert runtime < 120.0
    ok(
        8,
        f"precision {scores['precision']:.3f}, recall {scores['recall']:.3f} over "
        f"{truth.n_accounts} accounts in {runtime:.0f}s",
    )


# -- criterion 9 --------------------------------------------------------------


def test_c09_window_sweep_shape(big_campaign):
    files, truth = big_campaign
    paths = CampaignPaths.from_files(files)
    rows = sweep(paths, truth, [10, 30, 100, 3600], [10])
    by_window = {r["window_s"]: r for r in rows}
    assert by_window[3600]["precision"] < by_window[30]["precision"]
    counts = [by_window[w]["edge_count"] for w in (10, 30, 100, 3600)]
    assert counts == sorted(counts)
    points = edge_counts_by_prefix(files.events, 30, (0.25, 0.5, 0.75, 1.0))
    r2 = linear_r2([n for n, _ in points], [m for _, m in points])
    assert r2 >= 0.98
    ok(
        9,
        f"precision {by_window[30]['precision']:.2f}@30s -> "
        f"{by_window[3600]['precision']:.2f}@3600s; edges {counts}; prefix fit R2={r2:.4f}",
    )


# -- criterion 10 -------------------------------------------------------------


def test_c10_recompute_scales_linearly():
    points = recompute_runtime_curve([10_000, 20_000, 40_000, 80_000], seed=10, repeats=3)
    r2 = linear_r2([n for n, _ in points], [t for _, t in points])
    assert r2 >= 0.95
    ok(10, "recompute seconds per elements " +
       ", ".join(f"{n//1000}k:{t*1000:.0f}ms" for n, t in points) + f"; R2={r2:.4f}")


# -- criterion 11 -------------------------------------------------------------


def test_c11_service_contract():
    now = int(time.time())
    g = synthetic_component_graph(200_000, seed=11, now=now)  # ~100k accounts
    cfg = ServiceConfig(cc_size_threshold=10, window=WindowConfig(3600, 3600, 7.0))

    def measure(force_recomputes: bool):
        svc = RiskService(g, cfg)
        host, port = svc.start()
        latencies: list[list[float]] = [[] for _ in range(8)]
        observed: list[list[float]] = [[] for _ in range(8)]
        mixed = []
        stop = threading.Event()

        def reader(idx):
            conn = HTTPConnection(host, port, timeout=10)
            accounts = [f"b{i:08d}" for i in range(idx, 100_000, 8)]
            i = 0
            while not stop.is_set() or len(latencies[idx]) < 1250:
                if stop.is_set() and len(latencies[idx]) >= 1250:
                    break
                account = accounts[i % len(accounts)]
                i += 1
                t0 = time.perf_counter()
                conn.request("GET", "/risk/" + account)
                body = json.loads(conn.getresponse().read())
                latencies[idx].append(time.perf_counter() - t0)
                observed[idx].append(body["computed_at"])
                if body["found"] and body["updated_at"] != body["computed_at"]:
                    mixed.append(account)
                if not force_recomputes and len(latencies[idx]) >= 1250:
                    break
            conn.close()

        threads = [threading.Thread(target=reader, args=(i,), daemon=True) for i in range(8)]
        for t in threads:
            t.start()
        if force_recomputes:
            conn = HTTPConnection(host, port, timeout=60)
            for _ in range(50):
                conn.request("POST", "/admin/recompute")
                conn.getresponse().read()
            conn.close()
        stop.set()
        for t in threads:
            t.join()
        svc.stop()
        lats = sorted(x for bucket in latencies for x in bucket)
        total = len(lats)
        p95 = lats[int(0.95 * (total - 1))] * 1000.0
        seen = [x for bucket in observed for x in bucket]
        published = {ts for _, ts in svc.publication_log}
        assert not mixed, "a response mixed fields from two tables"
        assert set(seen) <= published, "observed a computed_at that was never published"
        for bucket in observed:
            assert bucket == sorted(bucket), "a reader went back in time"
        return p95, total, len(svc.publication_log)

    p95_idle, n_idle, _ = measure(force_recomputes=False)
    p95_busy, n_busy, publications = measure(force_recomputes=True)
    assert n_idle >= 10_000 and n_busy >= 10_000
    assert publications >= 51
    assert p95_busy <= 2 * p95_idle, f"{p95_busy:.2f}ms vs idle {p95_idle:.2f}ms"
    assert p95_busy <= 25.0
    ok(
        11,
        f"p95 {p95_idle:.2f}ms idle vs {p95_busy:.2f}ms under {publications - 1} recomputes "
        f"({n_busy} lookups, all snapshots published)",
    )


# -- criterion 12 -------------------------------------------------------------


def test_c12_determinism(tmp_path):
    spec = CampaignSpec(
        seed=1234,
        n_normal_accounts=3000,
        fraud_groups=standard_fraud_groups(1),
        ip_collision_groups=2,
    )
    outs = []
    for run in ("one", "two"):
        d = tmp_path / run
        files, _ = generate(spec, d)
        g, _ = load_campaign(CampaignPaths.from_files(files))
        labeling = dag_cc(g)
        profiles = profile_components(g, labeling)
        outcomes = evaluate_rules(g, profiles, per_account_stats(g))
        write_rule_outcomes_jsonl(outcomes, d / "rules.jsonl")
        write_profiles_csv(profiles, d / "profiles.csv")
        outs.append(d)
    first, second = outs
    for name in ("orders.jsonl", "devices.csv", "referrals.csv", "events.jsonl",
                 "ground_truth.jsonl", "rules.jsonl", "profiles.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    ok(12, "generator output and reports byte-identical across two runs")
