"""Collective algorithm shapes in the communication matrix and graphs.

Runs allreduce with three algorithms in two styles and prints the structures
the views expose: recursive doubling touches exactly the rank pairs whose
indices differ in one bit; a per-rank ring is a directed cycle through every
process; routing through node leaders concentrates inter-node traffic on one
process per node, which then uses a single NIC for both directions while the
per-rank ring enters and leaves a node through different NICs.
"""

from commtrace import (
    FilterSpec,
    TraceSet,
    WorkloadSpec,
    build_curated,
    comm_matrix,
    device_graph,
    emit,
    process_graph,
)
from commtrace.topology import ClusterTopology, NodeSpec, ProtocolConfig, Scenario


def run(alg, style, n_nodes=4, ranks_per_node=2):
    topo = ClusterTopology(
        [
            NodeSpec(
                name=f"n{i}",
                ranks=[i * ranks_per_node + k for k in range(ranks_per_node)],
                gpus=0,
                nics=["mlx5_0", "mlx5_1"],
            )
            for i in range(n_nodes)
        ]
    )
    sc = Scenario(
        topo,
        ProtocolConfig(seed=1, rndv_thresh=1 << 20),
        [WorkloadSpec(pattern="allreduce", msg_size=8192, buffer_kind="host",
                      allreduce_alg=alg, allreduce_style=style)],
    )
    r = emit(sc)
    trace, _ = build_curated(
        TraceSet(processes=r.logs(), allocs=r.alloc_logs(), topology=topo)
    )
    return trace


def print_matrix(trace, title):
    m = comm_matrix(trace, FilterSpec(metric="count"))
    print(f"\n{title} (message counts)")
    print("      " + " ".join(f"{r:>4d}" for r in m.ranks))
    for i, row in enumerate(m.values):
        print(f"  {m.ranks[i]:>3d} " + " ".join(f"{v:>4d}" for v in row))


trace = run("recursive_doubling", "per_rank")
print_matrix(trace, "recursive doubling, per rank: nonzero iff popcount(i xor j) == 1")

trace = run("ring", "per_rank")
g = process_graph(trace, FilterSpec(metric="count"))
print("\nper-rank ring edges (a directed cycle):")
print("  " + "  ".join(f"{e['src']}->{e['dst']}" for e in g.edges))

trace_leader = run("ring", "node_leader")
g = process_graph(trace_leader, FilterSpec(metric="count"))
node_of = {p.proc_uid: p.node for p in trace_leader.processes}
inter = [(e["src"], e["dst"]) for e in g.edges if node_of[e["src"]] != node_of[e["dst"]]]
print("\nnode-leader ring: inter-node edges only between the leaders")
print("  " + "  ".join(f"{s}->{d}" for s, d in inter))


def nic_usage(trace):
    dg = device_graph(trace, FilterSpec(metric="count"))
    per_node = {}
    for e in dg.edges:
        for end in (e["src"], e["dst"]):
            if end.startswith("nic:"):
                _, node, nic = end.split(":")
                per_node.setdefault(node, set()).add(nic)
    return {n: sorted(s) for n, s in sorted(per_node.items())}


print("\nNICs used per node, ring algorithm:")
print(f"  node_leader style: {nic_usage(trace_leader)}")
print(f"  per_rank style:    {nic_usage(trace)}")
print("  one NIC per node when a leader both sends and receives;")
print("  two when different boundary ranks handle each direction")
