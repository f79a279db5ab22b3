"""
Driving a live campaign over HTTP
=================================

Real deployments have no ground truth: an operator asks the service
which pool to test, runs the assay, posts the outcome, and repeats
until the service says to stop. This script starts the API in-process
(the same app `gt serve` runs), walks one session through that loop
with simulated lab results, and prints the wire traffic.
"""

import json
import tempfile
import threading
import time
import urllib.request
from pathlib import Path

import numpy as np
import uvicorn

from pooltest.service import create_app

state_dir = Path(tempfile.mkdtemp(prefix="gt-demo-"))
server = uvicorn.Server(
    uvicorn.Config(create_app(state_dir), host="127.0.0.1", port=8731, log_level="error")
)
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)
base = "http://127.0.0.1:8731/v1"


def call(method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(f"{base}{path}", data=data, method=method,
                                 headers={"content-type": "application/json"})
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read()) if resp.status != 204 else None


session = call("POST", "/sessions", {
    "n": 10,
    "prior": {"q": 0.1},
    "assumed_params": {"s": 0.8, "sigma": 0.8},
    "delta": 0.6,
    "max_tests": 30,
})
sid = session["session_id"]
print(f"session {sid}\n")

# Simulate the lab: person 3 is secretly infected, assay is 80/80.
rng = np.random.default_rng(11)
infected = {3}

for t in range(1, 31):
    rec = call("GET", f"/sessions/{sid}/recommendation")
    pool = rec["group"]
    hit = bool(infected & set(pool))
    p_pos = 0.8 if hit else 0.2
    outcome = int(rng.random() < p_pos)
    result = call("POST", f"/sessions/{sid}/results",
                  {"group": pool, "outcome": outcome})
    print(f"t={t:<2d} pool={','.join(map(str, pool)):<16} y={outcome} "
          f"H={result['entropy_bits']:.4f} (stop at {result['delta_threshold_bits']:.4f})")
    if result["stopped"]:
        break

state = call("GET", f"/sessions/{sid}/state")
print(f"\nstatus: {state['status']} after {len(state['history'])} tests")
ranked = sorted(enumerate(state["marginals"]), key=lambda kv: -kv[1])
print("top suspects:")
for i, p in ranked[:3]:
    print(f"  {i}: {p:.4f}")

call("DELETE", f"/sessions/{sid}")
server.should_exit = True
print("\nsession deleted, server stopped")
