"""Labeled synthetic campaigns: normal incentive traffic plus planted fraud.

The generator emits the four logs the ingest module reads (bonus orders,
phone devices, referrals, risk events) together with a ground-truth file
naming every planted fraud account. Truth is by construction, so precision
and recall can be computed without any external scoring service.

Planted patterns and the rule meant to catch them:

* ``long_chain``          deep invitation chain            -> depth rule
* ``bonus_aggregation``   many senders paying few accounts -> non-self-order rule
* ``device_farm``         many accounts on few devices     -> shared-device rule
* ``homogeneous_fanout``  every inviter invites the same   -> Gini rule
* ``ip_burst``            tight bursts on shared IPs       -> component-size threshold

Normal traffic is shaped to stay clear of every rule: invitation components
stay small and shallow, bonuses are self-claimed, devices are unique, and
IPs are private to one account except for configured collision groups whose
members share an IP only at wide gaps. Those collisions are the knob that
creates honest false-positive pressure at large co-context windows.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

# fixed campaign week so generated data is stable across runs and machines
DEFAULT_START = 1586304000  # 2020-04-08T00:00:00Z
DEFAULT_END = 1586908800  # 2020-04-15T00:00:00Z

PATTERNS = ("long_chain", "device_farm", "bonus_aggregation", "homogeneous_fanout", "ip_burst")


class GeneratorError(Exception):
    pass


@dataclass(frozen=True)
class FraudGroupSpec:
    pattern: str
    params: tuple[tuple[str, int], ...] = ()

    def param(self, name: str, default: int) -> int:
        return dict(self.params).get(name, default)

    @classmethod
    def make(cls, pattern: str, **params: int) -> "FraudGroupSpec":
        if pattern not in PATTERNS:
            raise GeneratorError(f"unknown fraud pattern {pattern!r}")
        return cls(pattern, tuple(sorted(params.items())))


@dataclass(frozen=True)
class CampaignSpec:
    seed: int = 0
    n_normal_accounts: int = 1000
    fraud_groups: tuple[FraudGroupSpec, ...] = ()
    invitees_per_bonus: int = 10
    time_range: tuple[int, int] = (DEFAULT_START, DEFAULT_END)
    # normal invitation shape: power-law fanout with a probability spike at
    # exactly 10 (the campaign's bonus-qualifying count)
    invite_probability: float = 0.35
    fanout_alpha: float = 2.0
    fanout_spike_at_10: float = 0.15
    second_level_probability: float = 0.15
    max_normal_component: int = 25
    events_per_account: int = 2
    # controlled normal IP sharing (false-positive pressure at wide windows)
    ip_collision_groups: int = 0
    ip_collision_group_size: int = 12
    ip_collision_min_gap_s: int = 200
    ip_collision_max_gap_s: int = 1800

    def validate(self) -> None:
        if self.n_normal_accounts < 1:
            raise GeneratorError("n_normal_accounts must be >= 1")
        if self.invitees_per_bonus < 1:
            raise GeneratorError("invitees_per_bonus must be >= 1")
        if self.time_range[0] >= self.time_range[1]:
            raise GeneratorError("time_range must be increasing")
        need = self.ip_collision_groups * self.ip_collision_group_size
        if need > self.n_normal_accounts:
            raise GeneratorError("not enough normal accounts for the collision groups")
        if self.ip_collision_groups and self.ip_collision_min_gap_s < 1:
            raise GeneratorError("ip_collision_min_gap_s must be >= 1")
        for grp in self.fraud_groups:
            _validate_group(grp)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_normal_accounts": self.n_normal_accounts,
            "fraud_groups": [
                {"pattern": grp.pattern, **dict(grp.params)} for grp in self.fraud_groups
            ],
            "invitees_per_bonus": self.invitees_per_bonus,
            "time_range": list(self.time_range),
            "invite_probability": self.invite_probability,
            "fanout_alpha": self.fanout_alpha,
            "fanout_spike_at_10": self.fanout_spike_at_10,
            "second_level_probability": self.second_level_probability,
            "max_normal_component": self.max_normal_component,
            "events_per_account": self.events_per_account,
            "ip_collision_groups": self.ip_collision_groups,
            "ip_collision_group_size": self.ip_collision_group_size,
            "ip_collision_min_gap_s": self.ip_collision_min_gap_s,
            "ip_collision_max_gap_s": self.ip_collision_max_gap_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignSpec":
        groups = tuple(
            FraudGroupSpec.make(g["pattern"], **{k: v for k, v in g.items() if k != "pattern"})
            for g in d.get("fraud_groups", [])
        )
        kwargs = {k: v for k, v in d.items() if k in cls.__dataclass_fields__ and k != "fraud_groups"}
        if "time_range" in kwargs:
            kwargs["time_range"] = tuple(kwargs["time_range"])
        return replace(cls(), **kwargs, fraud_groups=groups)


def _validate_group(grp: FraudGroupSpec) -> None:
    if grp.pattern not in PATTERNS:
        raise GeneratorError(f"unknown fraud pattern {grp.pattern!r}")
    if grp.pattern == "long_chain":
        if grp.param("depth", 60) < 1:
            raise GeneratorError("long_chain depth must be >= 1")
    elif grp.pattern == "device_farm":
        accounts = grp.param("accounts", 30)
        imeis = grp.param("imeis", 10)
        if imeis < 1 or accounts < 2:
            raise GeneratorError("device_farm needs accounts >= 2 and imeis >= 1")
        if imeis > accounts:
            raise GeneratorError("device_farm cannot use more imeis than accounts")
    elif grp.pattern == "bonus_aggregation":
        if grp.param("senders", 12) < 1 or grp.param("beneficiaries", 2) < 1:
            raise GeneratorError("bonus_aggregation needs senders >= 1 and beneficiaries >= 1")
    elif grp.pattern == "homogeneous_fanout":
        if grp.param("fanout", 10) < 1 or grp.param("levels", 3) < 1:
            raise GeneratorError("homogeneous_fanout needs fanout >= 1 and levels >= 1")
    elif grp.pattern == "ip_burst":
        if grp.param("accounts", 20) < 2 or grp.param("ips", 2) < 1:
            raise GeneratorError("ip_burst needs accounts >= 2 and ips >= 1")
        if grp.param("intra_gap_s", 5) < 0:
            raise GeneratorError("ip_burst intra_gap_s must be >= 0")


def standard_fraud_groups(per_pattern: int = 2) -> tuple[FraudGroupSpec, ...]:
    """A balanced fraud mix, ``per_pattern`` groups of each pattern."""
    groups = []
    for _ in range(per_pattern):
        groups.append(FraudGroupSpec.make("long_chain", depth=60))
        groups.append(FraudGroupSpec.make("device_farm", accounts=30, imeis=10))
        groups.append(FraudGroupSpec.make("bonus_aggregation", senders=12, beneficiaries=2))
        groups.append(FraudGroupSpec.make("homogeneous_fanout", fanout=10, levels=3))
        groups.append(FraudGroupSpec.make("ip_burst", accounts=20, ips=2, intra_gap_s=5))
    return tuple(groups)


@dataclass
class GroundTruth:
    fraud_accounts: frozenset[str]
    groups: tuple[tuple[int, str, frozenset[str]], ...]
    n_accounts: int

    def accounts_of(self, pattern: str) -> frozenset[str]:
        hit: set[str] = set()
        for _, pat, members in self.groups:
            if pat == pattern:
                hit |= members
        return frozenset(hit)


@dataclass
class CampaignFiles:
    orders: Path
    devices: Path
    referrals: Path
    events: Path
    ground_truth: Path


def _iso(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class _Builder:
    def __init__(self, spec: CampaignSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.accounts: list[str] = []
        self.reg_ts: dict[str, int] = {}
        self.referrals: list[tuple[str, str]] = []  # (sender, recv)
        self.devices: list[tuple[str, str]] = []
        self.orders: list[dict] = []
        self.events: list[tuple[int, str, str, str]] = []  # ts, type, account, ip
        self._order_seq = 0
        self._no_self_claim: set[str] = set()

    def new_account(self, key: str) -> str:
        start, end = self.spec.time_range
        self.accounts.append(key)
        self.reg_ts[key] = self.rng.randint(start, start + (end - start) // 2)
        return key

    def invite(self, sender: str, recv: str) -> None:
        self.referrals.append((sender, recv))

    def order(self, sender: str, recv: str) -> None:
        self._order_seq += 1
        ts = self.rng.randint(self.reg_ts[sender], self.spec.time_range[1])
        self.orders.append(
            {
                "order_id": f"o{self._order_seq:08d}",
                "order_date": _iso(ts),
                "bonus_name": "referral-bonus",
                "sendr_phone": sender,
                "recvr_phone": recv,
            }
        )

    def event(self, ts: int, account: str, ip: str) -> None:
        kind = self.rng.choice(("login", "browse", "purchase"))
        self.events.append((ts, kind, account, ip))

    def self_claim_orders(self) -> None:
        """Everyone who qualified claims their bonuses to themselves."""
        outdeg: dict[str, int] = {}
        for sender, _ in self.referrals:
            outdeg[sender] = outdeg.get(sender, 0) + 1
        per = self.spec.invitees_per_bonus
        for account in self.accounts:
            if account in self._no_self_claim:
                continue
            for _ in range(outdeg.get(account, 0) // per):
                self.order(account, account)


def _fanout(spec: CampaignSpec, rng: random.Random) -> int:
    if rng.random() < spec.fanout_spike_at_10:
        return 10
    weights = [k ** (-spec.fanout_alpha) for k in range(1, 10)]
    return rng.choices(range(1, 10), weights=weights)[0]


def _gen_normals(b: _Builder) -> None:
    spec = b.spec
    rng = b.rng
    keys = [b.new_account(f"13{i:09d}") for i in range(spec.n_normal_accounts)]
    for key in keys:
        b.devices.append((key, f"imei-n-{key}"))

    cap = min(spec.max_normal_component, 29)  # stay under the size-30 rules
    idx = 0
    while idx < len(keys):
        root = keys[idx]
        idx += 1
        if rng.random() >= spec.invite_probability:
            continue
        k = min(_fanout(spec, rng), cap - 1, len(keys) - idx)
        if k <= 0:
            continue
        invitees = keys[idx : idx + k]
        idx += k
        size = 1 + k
        for inv in invitees:
            b.invite(root, inv)
        for inv in invitees:
            if size >= cap or idx >= len(keys):
                break
            if rng.random() < spec.second_level_probability:
                k2 = min(_fanout(spec, rng), cap - size, len(keys) - idx)
                if k2 <= 0:
                    continue
                second = keys[idx : idx + k2]
                idx += k2
                size += k2
                for w in second:
                    b.invite(inv, w)

    # each normal account browses from its own IP
    start, end = spec.time_range
    for i, key in enumerate(keys):
        ip = f"10.{(i >> 16) & 255}.{(i >> 8) & 255}.{i & 255}"
        times = sorted(rng.randint(start, end) for _ in range(spec.events_per_account))
        for ts in times:
            b.event(ts, key, ip)

    # collision groups: the tail of the normal pool keeps sharing an IP all
    # campaign long, but only at gaps wide enough that narrow windows never
    # link them
    tail = keys[len(keys) - spec.ip_collision_groups * spec.ip_collision_group_size :]
    for c in range(spec.ip_collision_groups):
        members = tail[c * spec.ip_collision_group_size : (c + 1) * spec.ip_collision_group_size]
        ip = f"172.16.{c >> 8}.{c & 255}"
        ts = start + c * 120
        i = 0
        while ts < end:
            b.event(ts, members[i % len(members)], ip)
            i += 1
            ts += rng.randint(spec.ip_collision_min_gap_s, spec.ip_collision_max_gap_s)


def _gen_fraud_group(b: _Builder, gid: int, grp: FraudGroupSpec) -> frozenset[str]:
    rng = b.rng
    spec = b.spec
    start, end = spec.time_range
    prefix = f"15{gid:03d}"
    mk = lambda j: b.new_account(f"{prefix}{j:06d}")  # noqa: E731

    if grp.pattern == "long_chain":
        depth = grp.param("depth", 60)
        members = [mk(j) for j in range(depth + 1)]
        for u, v in zip(members, members[1:]):
            b.invite(u, v)
        for j, m in enumerate(members):
            b.devices.append((m, f"imei-f{gid:03d}-{j:04d}"))
            b.event(rng.randint(start, end), m, f"10.77.{gid}.{j % 250}")

    elif grp.pattern == "device_farm":
        n, n_imei = grp.param("accounts", 30), grp.param("imeis", 10)
        members = [mk(j) for j in range(n)]
        for v in members[1:]:
            b.invite(members[0], v)
        for j, m in enumerate(members):
            b.devices.append((m, f"imei-f{gid:03d}-{j % n_imei:04d}"))
            b.event(rng.randint(start, end), m, f"10.78.{gid}.{j % 250}")

    elif grp.pattern == "bonus_aggregation":
        n_send = grp.param("senders", 12)
        n_benef = grp.param("beneficiaries", 2)
        orders_per = grp.param("orders_per_sender", 1)
        senders = [mk(j) for j in range(n_send)]
        beneficiaries = [mk(n_send + j) for j in range(n_benef)]
        for v in senders[1:]:
            b.invite(senders[0], v)
        for i, s in enumerate(senders):
            b._no_self_claim.add(s)
            for r in range(orders_per):
                b.order(s, beneficiaries[(i + r) % n_benef])
        for j, m in enumerate(senders + beneficiaries):
            b.devices.append((m, f"imei-f{gid:03d}-{j:04d}"))
            b.event(rng.randint(start, end), m, f"10.79.{gid}.{j % 250}")
        members = senders + beneficiaries

    elif grp.pattern == "homogeneous_fanout":
        fanout = grp.param("fanout", 10)
        levels = grp.param("levels", 3)
        root = mk(0)
        members = [root]
        inviter = root
        j = 1
        for _ in range(levels):
            children = []
            for _ in range(fanout):
                children.append(mk(j))
                j += 1
            for c in children:
                b.invite(inviter, c)
            members.extend(children)
            inviter = children[0]
        for k, m in enumerate(members):
            b.devices.append((m, f"imei-f{gid:03d}-{k:04d}"))
            b.event(rng.randint(start, end), m, f"10.80.{gid}.{k % 250}")

    else:  # ip_burst
        n = grp.param("accounts", 20)
        n_ip = grp.param("ips", 2)
        gap = grp.param("intra_gap_s", 5)
        sessions = grp.param("sessions", 24)
        members = [mk(j) for j in range(n)]
        for j, m in enumerate(members):
            b.devices.append((m, f"imei-f{gid:03d}-{j:04d}"))
        # the controlling program re-runs its burst throughout the campaign,
        # cycling every account through every shared IP at tight gaps
        stride = (end - start) // sessions
        for s in range(sessions):
            for k in range(n_ip):
                ip = f"192.168.{gid % 250}.{k % 250}"
                ts = start + s * stride + gid * 660 + k * 300
                for m in members:
                    b.event(ts, m, ip)
                    ts += rng.randint(0, gap) if gap else 0

    return frozenset(members)


def generate(spec: CampaignSpec, out_dir) -> tuple[CampaignFiles, GroundTruth]:
    """Write the four logs plus ground truth; same seed, same bytes."""
    spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    b = _Builder(spec)
    _gen_normals(b)
    groups = []
    for gid, grp in enumerate(spec.fraud_groups):
        members = _gen_fraud_group(b, gid, grp)
        groups.append((gid, grp.pattern, members))
    b.self_claim_orders()

    truth = GroundTruth(
        fraud_accounts=frozenset().union(*(m for _, _, m in groups)) if groups else frozenset(),
        groups=tuple(groups),
        n_accounts=len(b.accounts),
    )
    _audit(b, truth)

    files = CampaignFiles(
        orders=out / "orders.jsonl",
        devices=out / "devices.csv",
        referrals=out / "referrals.csv",
        events=out / "events.jsonl",
        ground_truth=out / "ground_truth.jsonl",
    )
    with open(files.orders, "w", encoding="utf-8") as fh:
        for o in b.orders:
            fh.write(json.dumps(o, separators=(",", ":")) + "\n")
    with open(files.devices, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phone_number", "imei"])
        w.writerows(b.devices)
    with open(files.referrals, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["recv_phone", "recv_reg_date", "sender_phone", "sender_reg_date"])
        for sender, recv in b.referrals:
            w.writerow([recv, _iso(b.reg_ts[recv]), sender, _iso(b.reg_ts[sender])])
    with open(files.events, "w", encoding="utf-8") as fh:
        for ts, kind, account, ip in sorted(b.events, key=lambda e: e[0]):
            fh.write(
                json.dumps(
                    {"ts": ts, "event_type": kind, "account": account, "ip": ip},
                    separators=(",", ":"),
                )
                + "\n"
            )
    with open(files.ground_truth, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"type": "meta", "n_accounts": truth.n_accounts}) + "\n")
        for gid, pattern, members in truth.groups:
            fh.write(
                json.dumps(
                    {"type": "group", "group": gid, "pattern": pattern,
                     "accounts": sorted(members)},
                    separators=(",", ":"),
                )
                + "\n"
            )
    return files, truth


def load_ground_truth(path) -> GroundTruth:
    groups = []
    n_accounts = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            if obj.get("type") == "meta":
                n_accounts = int(obj["n_accounts"])
            else:
                groups.append((int(obj["group"]), obj["pattern"], frozenset(obj["accounts"])))
    fraud = frozenset().union(*(m for _, _, m in groups)) if groups else frozenset()
    return GroundTruth(fraud, tuple(groups), n_accounts)


def _audit(b: _Builder, truth: GroundTruth) -> None:
    """Generator self-check: no normal account may satisfy a planted pattern.

    Catches shape regressions at generation time instead of letting them
    masquerade as detector false positives.
    """
    spec = b.spec
    normal = set(b.accounts) - set(truth.fraud_accounts)

    # invitation components among normal accounts: small and shallow
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    children: dict[str, list[str]] = {}
    for s, r in b.referrals:
        if s in normal and r in normal:
            parent.setdefault(s, s)
            parent.setdefault(r, r)
            rs, rr = find(s), find(r)
            if rs != rr:
                parent[rr] = rs
            children.setdefault(s, []).append(r)
    comp_size: dict[str, int] = {}
    for v in parent:
        comp_size[find(v)] = comp_size.get(find(v), 0) + 1
    oversize = [root for root, n in comp_size.items() if n >= 30]
    if oversize:
        raise GeneratorError(f"normal component of size >= 30 rooted near {oversize[0]}")

    def tree_depth(root: str) -> int:
        best, stack = 0, [(root, 0)]
        while stack:
            v, d = stack.pop()
            best = max(best, d)
            for w in children.get(v, ()):
                stack.append((w, d + 1))
        return best

    invited = {r for _, r in b.referrals if r in normal}
    for root in (v for v in parent if v not in invited):
        if tree_depth(root) > 5:
            raise GeneratorError(f"normal invitation depth > 5 under {root}")

    # bonuses: normal senders only ever pay themselves
    for o in b.orders:
        if o["sendr_phone"] in normal and o["recvr_phone"] != o["sendr_phone"]:
            raise GeneratorError(f"normal account {o['sendr_phone']} paid someone else")

    # devices: one normal account per imei
    seen_imei: dict[str, str] = {}
    for phone, imei in b.devices:
        if phone in normal:
            if imei in seen_imei:
                raise GeneratorError(f"normal imei {imei} reused")
            seen_imei[imei] = phone

    # shared IPs among normal accounts only at gaps wider than the floor
    by_ip: dict[str, list[tuple[int, str]]] = {}
    for ts, _, account, ip in sorted(b.events, key=lambda e: e[0]):
        if account in normal:
            by_ip.setdefault(ip, []).append((ts, account))
    floor = spec.ip_collision_min_gap_s
    for ip, seq in by_ip.items():
        for (t0, a0), (t1, a1) in zip(seq, seq[1:]):
            if a0 != a1 and t1 - t0 < floor:
                raise GeneratorError(f"normal accounts {a0},{a1} share {ip} at gap {t1 - t0}s")


# -- scoring ---------------------------------------------------------------


def precision_recall(flagged: set[str], truth: GroundTruth | set[str] | frozenset[str],
                     n_accounts: int | None = None) -> dict:
    """Standard precision/recall/F1 over account sets.

    An empty flagged set raised no false alarm, so its precision is 1.0 by
    convention (recall 0 unless truth is empty too).
    """
    if isinstance(truth, GroundTruth):
        truth_set = set(truth.fraud_accounts)
        if n_accounts is None:
            n_accounts = truth.n_accounts
    else:
        truth_set = set(truth)
    flagged = set(flagged)
    tp = len(flagged & truth_set)
    fp = len(flagged - truth_set)
    fn = len(truth_set - flagged)
    precision = tp / (tp + fp) if flagged else 1.0
    recall = tp / (tp + fn) if truth_set else 1.0
    f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
    out = {"precision": precision, "recall": recall, "f1": f1, "tp": tp, "fp": fp, "fn": fn}
    if n_accounts is not None:
        out["tn"] = n_accounts - tp - fp - fn
    return out


# -- invitation strategies (bonus arithmetic) -------------------------------


def strategy_referrals(strategy: int, n_accounts: int = 10) -> list[tuple[str, str]]:
    """Three ways to spend a fixed account budget on referral bonuses.

    1: two independent stars (half the budget each);
    2: one account invites everyone else;
    3: a chain of inviters, each inviting exactly the qualifying count,
       where each next inviter is the previous inviter's first invitee.
    Strategy 3 keeps one-bonus-per-account while matching strategy 2's
    total, which is why homogeneous fanout chains appear in the wild.
    """
    keys = [f"s{strategy}-{i:03d}" for i in range(n_accounts)]
    pairs: list[tuple[str, str]] = []
    if strategy == 1:
        half = n_accounts // 2
        for star in (keys[:half], keys[half:]):
            for v in star[1:]:
                pairs.append((star[0], v))
    elif strategy == 2:
        for v in keys[1:]:
            pairs.append((keys[0], v))
    elif strategy == 3:
        k = 3  # qualifying invitee count used in the strategy comparison
        inviter = keys[0]
        nxt = 1
        while nxt < n_accounts:
            batch = keys[nxt : nxt + k]
            for v in batch:
                pairs.append((inviter, v))
            nxt += len(batch)
            inviter = batch[0]
    else:
        raise ValueError(f"strategy must be 1, 2 or 3, got {strategy}")
    return pairs


def claimable_bonuses(referral_pairs, invitees_per_bonus: int) -> int:
    """Bonuses the inviters can claim from a referral edge list."""
    outdeg: dict[str, int] = {}
    for sender, _ in referral_pairs:
        outdeg[sender] = outdeg.get(sender, 0) + 1
    return sum(n // invitees_per_bonus for n in outdeg.values())


def write_strategy_referrals(strategy: int, path, n_accounts: int = 10,
                             reg_ts: int = DEFAULT_START) -> int:
    """Emit a strategy as a referral log; returns the claimable bonus count
    under the 3-invitees-per-bonus comparison."""
    pairs = strategy_referrals(strategy, n_accounts)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["recv_phone", "recv_reg_date", "sender_phone", "sender_reg_date"])
        for sender, recv in pairs:
            w.writerow([recv, _iso(reg_ts), sender, _iso(reg_ts)])
    return claimable_bonuses(pairs, 3)


def read_referral_pairs(path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            pairs.append((row["sender_phone"], row["recv_phone"]))
    return pairs


# -- numeric helpers ---------------------------------------------------------


def linear_r2(xs, ys) -> float:
    """Coefficient of determination of the least-squares line through (xs, ys)."""
    import numpy as np

    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot
