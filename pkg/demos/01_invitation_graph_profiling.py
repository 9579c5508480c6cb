"""Invitation-graph walkthrough: load logs, find components, apply the rules.

A tiny incentive campaign is written out as the three raw logs (bonus
orders, phone devices, referrals), loaded through declarative jobs, and
profiled. One planted deep chain and one device farm show up in the rule
report.

Run: python demos/01_invitation_graph_profiling.py
"""

import json
import tempfile
from pathlib import Path

from ringrisk import (
    PropertyGraph,
    default_jobs,
    dag_cc,
    evaluate_rules,
    per_account_stats,
    profile_components,
    risk_graph_schema,
    run_loading_job,
)

tmp = Path(tempfile.mkdtemp(prefix="ringrisk-demo-"))

# --- three raw logs -------------------------------------------------------
# normal users: two small invitation stars, everyone claims to themselves
referral_rows = []
order_rows = []
device_rows = []

for star, root in ((0, "13800000000"), (1, "13800000010")):
    for i in range(1, 4):
        invitee = f"138000000{star}{i}"
        referral_rows.append((invitee, root))
        device_rows.append((invitee, f"dev-{invitee}"))
    device_rows.append((root, f"dev-{root}"))

# planted: a 9-hop invitation chain re-using accounts mechanically
chain = [f"1550000000{i}" for i in range(10)]
for sender, recv in zip(chain, chain[1:]):
    referral_rows.append((recv, sender))
for m in chain:
    device_rows.append((m, f"dev-{m}"))

# planted: thirty accounts registered on six devices, all invited by one
farm = [f"15600000{i:03d}" for i in range(30)]
for m in farm[1:]:
    referral_rows.append((m, farm[0]))
for i, m in enumerate(farm):
    device_rows.append((m, f"farmdev-{i % 6}"))

# one bonus order, self-claimed, so the order plumbing is visible
order_rows.append(
    {"order_id": "o1", "order_date": "2020-04-10T10:00:00Z",
     "bonus_name": "referral-bonus", "sendr_phone": "13800000000",
     "recvr_phone": "13800000000"}
)

(tmp / "referrals.csv").write_text(
    "recv_phone,recv_reg_date,sender_phone,sender_reg_date\n"
    + "".join(f"{r},2020-04-09T00:00:00Z,{s},2020-04-08T00:00:00Z\n" for r, s in referral_rows)
)
(tmp / "devices.csv").write_text(
    "phone_number,imei\n" + "".join(f"{p},{d}\n" for p, d in device_rows)
)
(tmp / "orders.jsonl").write_text("".join(json.dumps(o) + "\n" for o in order_rows))

# --- load through the declarative jobs -------------------------------------
g = PropertyGraph(risk_graph_schema())
jobs = default_jobs()
for name, filename in (("orders", "orders.jsonl"), ("devices", "devices.csv"),
                       ("referrals", "referrals.csv")):
    report = run_loading_job(g, jobs[name], tmp / filename)
    print(f"{name:10s} records={report.records_read:3d} vertices={report.vertices_upserted:3d} "
          f"edges={report.edges_inserted:3d} rejected={len(report.rejected)}")

# --- components and their four statistics ----------------------------------
labeling = dag_cc(g)
profiles = profile_components(g, labeling)
print(f"\n{len(profiles)} invitation components:")
print(f"{'label':>14} {'size':>5} {'depth':>6} {'dev-ratio':>10} {'gini':>6}")
for p in profiles:
    print(f"{p.label:>14} {p.size:>5} {p.depth:>6} {p.shared_device_ratio:>10.2f} {p.gini:>6.3f}")

# --- rules ------------------------------------------------------------------
outcomes = evaluate_rules(g, profiles, per_account_stats(g))
print("\nrule outcomes (accounts flagged):")
for o in outcomes:
    mark = " <- deep chain" if o.rule_id == "a" and o.flagged_accounts else ""
    mark = " <- device farm" if o.rule_id == "c" and o.flagged_accounts else mark
    print(f"  rule {o.rule_id}: {len(o.flagged_accounts):3d} accounts{mark}")
