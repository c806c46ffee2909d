"""The analytic views and the HTTP API that serves them.

Computes the top-contenders table, timeline and device graph for a mixed
trace, demonstrates the filter algebra, then briefly starts the HTTP server
and fetches a filtered view from it, exactly as the browser explorer does.
"""

import json
import threading
import urllib.request

from commtrace import (
    FilterSpec,
    TraceSet,
    WorkloadSpec,
    apply_filter,
    build_curated,
    device_graph,
    emit,
    timeline,
    top_contenders,
)
from commtrace.server import make_server
from commtrace.topology import ClusterTopology, NodeSpec, ProtocolConfig, Scenario

scenario = Scenario(
    topology=ClusterTopology(
        [
            NodeSpec(name="n0", ranks=[0, 1], gpus=2, nics=["mlx5_0", "mlx5_1"]),
            NodeSpec(name="n1", ranks=[2, 3], gpus=2, nics=["mlx5_0", "mlx5_1"]),
        ]
    ),
    protocol=ProtocolConfig(seed=3, rndv_scheme="get", rndv_thresh=65536),
    workloads=[
        WorkloadSpec(pattern="p2p_all_to_all", msg_size=1 << 20, buffer_kind="gpu"),
        WorkloadSpec(pattern="p2p_all_to_all", msg_size=2048, buffer_kind="gpu"),
    ],
)
r = emit(scenario)
trace, _ = build_curated(
    TraceSet(processes=r.logs(), allocs=r.alloc_logs(), topology=scenario.topology)
)

print("top contenders (unfiltered):")
top = top_contenders(trace, FilterSpec())
print(f"  {'function':<10s} {'transport':<9s} {'bytes %':>8s} {'count %':>8s}")
for row in top.rows:
    print(f"  {row['uct_fn']:<10s} {row['transport']:<9s}"
          f" {row['pct_bytes']:>8.2f} {row['pct_count']:>8.2f}")

spec = FilterSpec(transports=frozenset({"cuda_ipc"}), metric="bytes")
kept = apply_filter(trace, spec)
print(f"\nfiltering to cuda_ipc keeps {len(kept)} of {len(trace.comms)} comms"
      f" ({sum(c.length for c in kept)} bytes)")

tl = timeline(trace, FilterSpec(metric="count"), bin_ns=20_000)
row = tl.series[trace.processes[0].proc_uid]
print(f"\ntimeline for {trace.processes[0].proc_uid}: {tl.bins} bins of {tl.bin_ns} ns")
print("  activity: " + "".join("#" if v else "." for v in row[:72]))

dg = device_graph(trace, FilterSpec(metric="bytes"))
kinds = {}
for v in dg.vertices:
    kinds.setdefault(v["kind"], []).append(v["id"])
print("\ndevice graph vertices (gpu=square, nic=triangle, host=circle):")
for kind, ids in sorted(kinds.items()):
    print(f"  {kind:<5s} {ids}")
nic_edges = [e for e in dg.edges if e["src"].startswith("nic:") and e["dst"].startswith("nic:")]
print(f"  {len(nic_edges)} NIC-to-NIC edges; every verbs comm splits into"
      " device->NIC, NIC->NIC, NIC->device legs of equal weight")

server = make_server(trace, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
host, port = server.server_address[:2]
with urllib.request.urlopen(
    f"http://{host}:{port}/top?transports=cuda_ipc&metric=count"
) as resp:
    doc = json.loads(resp.read())
print(f"\nGET /top?transports=cuda_ipc&metric=count -> filter echo"
      f" {doc['filter']['transports']}, {len(doc['payload']['rows'])} row(s),"
      f" computed in {doc['timing_ms']:.2f} ms")
server.shutdown()
