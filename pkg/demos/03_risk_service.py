"""The lookup service: materialized component sizes behind an HTTP endpoint.

Builds a shared-IP graph with one oversized cluster, starts the service
with a 1-second background recompute, queries it over HTTP, then inserts a
fresh edge and watches the next table pick it up.

Run: python demos/03_risk_service.py
"""

import json
import time
from http.client import HTTPConnection

from ringrisk import (
    PropertyGraph,
    RiskService,
    ServiceConfig,
    WindowConfig,
    risk_graph_schema,
)

now = int(time.time())
g = PropertyGraph(risk_graph_schema())


def link(a, b):
    g.insert_edge("shared_ip", a, b, {"created_at": now, "delta": 3, "value": "198.51.100.9"})


# a 12-account ring and a 3-account carpool
ring = [f"ring{i:02d}" for i in range(12)]
for a, b in zip(ring, ring[1:]):
    link(a, b)
link("carol", "dave")
link("dave", "erin")

svc = RiskService(g, ServiceConfig(cc_size_threshold=10, recompute_interval_s=1.0,
                                   window=WindowConfig(3600, 3600, 7.0)))
host, port = svc.start()
print(f"service up on http://{host}:{port}")

conn = HTTPConnection(host, port)


def show(path):
    conn.request("GET", path)
    body = json.loads(conn.getresponse().read())
    print(f"  GET {path}: {json.dumps(body)[:120]}")


show("/risk/ring00")   # cc_size 12 -> risky
show("/risk/carol")    # cc_size 3  -> not risky
show("/risk/mallory")  # not in the graph -> found=false
show("/health")

# new activity lands while the service keeps serving
print("\ninserting a fresh edge; background recompute runs every second...")
inserted_at = time.time()
link("frank", "grace")
while True:
    conn.request("GET", "/risk/frank")
    body = json.loads(conn.getresponse().read())
    if body["found"]:
        lag = body["computed_at"] - inserted_at
        print(f"  frank visible after {lag:.1f}s: cc_size={body['cc_size']}")
        break
    time.sleep(0.1)

show("/metrics")
conn.close()
svc.stop()
