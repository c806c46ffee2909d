"""Spotting a NUMA-affinity bug from the device view.

Two runs of the same GPU all-to-all: one with every task bound next to its
GPU, one where node n1's tasks are misbound. In the misbound run the device
graph filtered to the two nodes shows n0's GPUs talking to n1's *host*
processes (with cuda_copy cleanup transfers and a shared NIC) instead of
straight to n1's GPUs.
"""

from commtrace import (
    FilterSpec,
    TraceSet,
    WorkloadSpec,
    build_curated,
    device_graph,
    emit,
    top_contenders,
)
from commtrace.topology import ClusterTopology, NodeSpec, ProtocolConfig, Scenario


def run(numa_ok: bool):
    topo = ClusterTopology(
        [
            NodeSpec(name="n0", ranks=[0, 1], gpus=2, nics=["mlx5_0", "mlx5_1"]),
            NodeSpec(
                name="n1", ranks=[2, 3], gpus=2, nics=["mlx5_0", "mlx5_1"],
                numa_correct={2: numa_ok, 3: numa_ok},
            ),
        ]
    )
    sc = Scenario(
        topo,
        ProtocolConfig(seed=5, rndv_scheme="get", rndv_thresh=8192),
        [WorkloadSpec(pattern="p2p_all_to_all", msg_size=1 << 20, buffer_kind="gpu")],
    )
    r = emit(sc)
    trace, _ = build_curated(
        TraceSet(processes=r.logs(), allocs=r.alloc_logs(), topology=topo)
    )
    return trace


def describe(trace, title):
    spec = FilterSpec(
        nodes=frozenset({"n0", "n1"}),
        transports=frozenset({"rc_mlx5", "gdr_copy", "cuda_copy"}),
        metric="count",
    )
    dg = device_graph(trace, spec)
    print(f"\n{title}")
    gpu_to_host = [
        e for e in dg.edges
        if e["src"].startswith("nic:") and e["dst"].startswith("host:")
    ]
    host_endpoints = sorted({e["dst"] for e in gpu_to_host})
    print(f"  NIC -> host edges: {len(gpu_to_host)}"
          + (f"  (landing on {host_endpoints})" if host_endpoints else ""))
    top = top_contenders(trace, spec)
    cuda_copy = [r for r in top.rows if r["transport"] == "cuda_copy"]
    if cuda_copy:
        for row in cuda_copy:
            print(f"  cleanup traffic: {row['uct_fn']} on cuda_copy,"
                  f" {row['count']} transfers")
    else:
        print("  no cuda_copy traffic")
    nic_use = sorted({e["src"] for e in dg.edges if e["src"].startswith("nic:n1")})
    print(f"  n1 NICs sending: {nic_use}")


describe(run(numa_ok=True), "aligned run: traffic lands directly on the GPUs")
describe(run(numa_ok=False), "misbound run: GPU traffic detours through host memory")
print("\nthe misbound signature: host endpoints behind the NIC, cuda_copy"
      " staging transfers, and a single shared NIC on the broken node")
