"""How a logical message becomes transport operations.

Walks the protocol-selection rules over message size, buffer placement and
rendezvous scheme, printing the operation sequence each combination expands
to: the intra-node cuda_ipc rendezvous, the notification + RDMA-read get
scheme, the host-staged RDMA-write put scheme, the gdr_copy/sysv bounce path
for small intra-node device buffers, and the zero-copy active message with a
receiver-side gdr_copy handler.
"""

from commtrace import ProtocolConfig, select_path
from commtrace.plan import LogicalMessage
from commtrace.topology import ClusterTopology, NodeSpec

topology = ClusterTopology(
    [
        NodeSpec(name="n0", ranks=[0, 1], gpus=2, nics=["mlx5_0", "mlx5_1"]),
        NodeSpec(name="n1", ranks=[2, 3], gpus=2, nics=["mlx5_0", "mlx5_1"]),
    ]
)


def show(title, msg, config):
    plan = select_path(msg, topology, config)
    print(f"\n{title}")
    print(f"  pattern={plan.pattern}  rendezvous={plan.rndv}  data_hops={plan.data_hops}")
    for op in plan.ops:
        where = "sender" if op.executor == "src" else "receiver"
        nic = f"  nics={op.nic_src}->{op.nic_dst}" if op.nic_src else ""
        bufs = ""
        if op.local_buf or op.remote_buf:
            bufs = f"  bufs=({op.local_buf}, {op.remote_buf})"
        print(
            f"    [{where:8s}] {op.family}_{op.mode:<6s} on {op.transport:<9s}"
            f" {op.length:>8d} B  role={op.role}{nic}{bufs}"
        )


def msg(dst, size, kind="gpu"):
    return LogicalMessage(
        src_rank=0, dst_rank=dst, bytes=size, mpi_fn="MPI_Isend", tag=0, buffer_kind=kind
    )


get_cfg = ProtocolConfig(rndv_thresh=8192, rndv_scheme="get")
put_cfg = ProtocolConfig(rndv_thresh=8192, rndv_scheme="put")

print("=== GPU buffers, 1 MiB (rendezvous territory) ===")
show("intra-node: single zero-copy get over cuda_ipc", msg(1, 1 << 20), get_cfg)
show("inter-node, get scheme: notification, then RDMA read by the receiver",
     msg(2, 1 << 20), get_cfg)
show("inter-node, put scheme: stage to host, then RDMA write by the sender",
     msg(2, 1 << 20), put_cfg)

print("\n=== GPU buffers, 1 KiB (eager territory) ===")
show("intra-node: bounce through host memory (gdr_copy / sysv / gdr_copy)",
     msg(1, 1024), get_cfg)
show("inter-node: zero-copy active message + gdr_copy handler on the receiver",
     msg(2, 1024), get_cfg)

print("\n=== host buffers ===")
show("intra-node small: inline sysv active message", msg(1, 48, "host"), get_cfg)
show("intra-node large: buffered-copy sysv active message", msg(1, 4096, "host"), get_cfg)
show("inter-node rendezvous over verbs", msg(2, 1 << 20, "host"), get_cfg)

print("\n=== degenerate ===")
show("zero-byte message: a bare active message, no data path", msg(2, 0), get_cfg)

print("\n=== NUMA-misbound receiver (GPU loses its dedicated NIC) ===")
numa_topo = ClusterTopology(
    [
        NodeSpec(name="n0", ranks=[0, 1], gpus=2, nics=["mlx5_0", "mlx5_1"]),
        NodeSpec(
            name="n1", ranks=[2, 3], gpus=2, nics=["mlx5_0", "mlx5_1"],
            numa_correct={2: False, 3: False},
        ),
    ]
)
plan = select_path(msg(2, 1 << 20), numa_topo, get_cfg)
print(f"  pattern={plan.pattern}")
for op in plan.ops:
    print(f"    {op.role:<10s} {op.family}_{op.mode} on {op.transport}"
          + (f" via {op.nic_src}->{op.nic_dst}" if op.nic_src else ""))
print("  the extra cuda_copy hops are the staging through the host process")
