"""Transport-path selection: logical message -> transport operation sequence.

Reproduces the data paths a UCX-style stack picks for CUDA-aware traffic:

* intra-node GPU rendezvous goes over cuda_ipc as a single remote get;
* inter-node GPU rendezvous either has the receiver pull the data
  (get scheme: notification + RDMA read) or has the sender stage the buffer
  to the host over cuda_copy and push it with an RDMA write (put scheme);
* intra-node GPU eager bounces through host memory: gdr_copy to the host,
  a sysv active message to the peer, gdr_copy put onto the target device;
* inter-node GPU eager sends a zero-copy active message straight out of
  device memory, and the receiving side's gdr_copy handler lands it on the
  target GPU;
* host traffic uses sysv within a node and rc/dc verbs across nodes, with
  active messages below the rendezvous threshold (inline short up to 64
  bytes, buffered copy above).

rc_mlx5 is replaced by dc_mlx5 once the job size reaches the configured task
threshold. Tasks flagged as NUMA-misbound lose their GPU's dedicated NIC
(they fall back to the node's first NIC) and stage GPU traffic through their
host process with extra cuda_copy hops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NoRoute
from .plan import LogicalMessage
from .topology import ClusterTopology, ProtocolConfig

SHORT_CUTOFF = 64  # eager inline/buffered-copy boundary, bytes

AM_ID_RNDV_HEADER = 1
AM_ID_EAGER = 2

# buffer placeholders, materialized to virtual addresses at emission time
SRC_DATA = "src_data"
DST_DATA = "dst_data"
SRC_STAGE = "src_stage"
DST_STAGE = "dst_stage"


@dataclass(frozen=True)
class PlannedUctOp:
    executor: str  # "src" | "dst"
    family: str
    mode: str
    transport: str
    role: str  # header | data | stage_d2h | stage_h2d
    length: int
    local_buf: str | None = None
    remote_buf: str | None = None
    am_id: int | None = None
    nic_src: str | None = None
    nic_dst: str | None = None

    def to_doc(self) -> dict:
        return {
            "executor": self.executor,
            "fn": f"{self.family}_{self.mode}",
            "transport": self.transport,
            "role": self.role,
            "length": self.length,
            "local_buf": self.local_buf,
            "remote_buf": self.remote_buf,
            "am_id": self.am_id,
            "nic_src": self.nic_src,
            "nic_dst": self.nic_dst,
        }


@dataclass
class PathPlan:
    pattern: str
    rndv: bool
    src_kind: str
    dst_kind: str
    src_gpu: int | None
    dst_gpu: int | None
    ops: list[PlannedUctOp] = field(default_factory=list)

    @property
    def data_hops(self) -> int:
        return sum(1 for op in self.ops if op.length > 0)

    def to_doc(self) -> dict:
        return {
            "pattern": self.pattern,
            "rndv": self.rndv,
            "src_kind": self.src_kind,
            "dst_kind": self.dst_kind,
            "ops": [op.to_doc() for op in self.ops],
        }


def _am_mode(length: int) -> str:
    return "short" if length <= SHORT_CUTOFF else "bcopy"


def select_path(
    msg: LogicalMessage, topology: ClusterTopology, config: ProtocolConfig
) -> PathPlan:
    src_node = topology.node_of(msg.src_rank)
    dst_node = topology.node_of(msg.dst_rank)
    intra = src_node.name == dst_node.name

    src_gpu = topology.gpu_of(msg.src_rank) if msg.buffer_kind == "gpu" else None
    dst_gpu = topology.gpu_of(msg.dst_rank) if msg.buffer_kind == "gpu" else None
    src_kind = "gpu" if src_gpu is not None else "host"
    dst_kind = "gpu" if dst_gpu is not None else "host"

    rc = "dc_mlx5" if topology.total_ranks >= config.dc_task_threshold else "rc_mlx5"
    src_nic = topology.gpu_nic(msg.src_rank) if src_kind == "gpu" else topology.host_nic(msg.src_rank)
    dst_nic = topology.gpu_nic(msg.dst_rank) if dst_kind == "gpu" else topology.host_nic(msg.dst_rank)
    src_numa_ok = src_node.numa_correct.get(msg.src_rank, True)
    dst_numa_ok = dst_node.numa_correct.get(msg.dst_rank, True)

    def plan(pattern: str, rndv: bool, ops: list[PlannedUctOp]) -> PathPlan:
        return PathPlan(
            pattern=pattern,
            rndv=rndv,
            src_kind=src_kind,
            dst_kind=dst_kind,
            src_gpu=src_gpu,
            dst_gpu=dst_gpu,
            ops=ops,
        )

    def require_nics():
        if src_nic is None or dst_nic is None:
            raise NoRoute(
                f"rank {msg.src_rank}->{msg.dst_rank}: path needs NICs on both nodes"
            )

    def nic_op(**kw) -> PlannedUctOp:
        return PlannedUctOp(transport=rc, nic_src=src_nic, nic_dst=dst_nic, **kw)

    size = msg.bytes

    if msg.src_rank == msg.dst_rank:
        return plan(
            "self",
            False,
            [
                PlannedUctOp(
                    executor="src",
                    family="am",
                    mode=_am_mode(size),
                    transport="self",
                    role="data",
                    length=size,
                    am_id=AM_ID_EAGER,
                )
            ],
        )

    if size == 0:
        if intra:
            op = PlannedUctOp(
                executor="src", family="am", mode="short", transport="sysv",
                role="data", length=0, am_id=AM_ID_EAGER,
            )
        else:
            require_nics()
            op = nic_op(
                executor="src", family="am", mode="short", role="data",
                length=0, am_id=AM_ID_EAGER,
            )
        return plan("zero", False, [op])

    rndv = size >= config.rndv_thresh or not config.eager_enabled

    # A GPU endpoint on a misbound task stages through its host process.
    src_staged = src_kind == "gpu" and not src_numa_ok
    dst_staged = dst_kind == "gpu" and not dst_numa_ok

    def stage_d2h() -> PlannedUctOp:
        return PlannedUctOp(
            executor="src", family="get", mode="zcopy", transport="cuda_copy",
            role="stage_d2h", length=size, local_buf=SRC_STAGE, remote_buf=SRC_DATA,
        )

    def stage_h2d() -> PlannedUctOp:
        return PlannedUctOp(
            executor="dst", family="put", mode="zcopy", transport="cuda_copy",
            role="stage_h2d", length=size, local_buf=DST_STAGE, remote_buf=DST_DATA,
        )

    def rndv_scheme() -> str:
        if config.rndv_scheme != "auto":
            return config.rndv_scheme
        if intra:
            return "get"
        nic_index = dst_node.nics.index(dst_nic) if dst_nic in dst_node.nics else 0
        return "get" if nic_index % 2 == 0 else "put"

    if intra:
        if rndv and src_kind == "gpu" and dst_kind == "gpu":
            if config.cuda_ipc_enabled:
                return plan(
                    "gpu_intra_rndv_ipc",
                    True,
                    [
                        PlannedUctOp(
                            executor="dst", family="get", mode="zcopy",
                            transport="cuda_ipc", role="data", length=size,
                            local_buf=DST_DATA, remote_buf=SRC_DATA,
                        )
                    ],
                )
            # cuda_ipc disabled: RDMA between NICs of the same node
            if src_nic is None or dst_nic is None:
                raise NoRoute(
                    f"rank {msg.src_rank}->{msg.dst_rank}: cuda_ipc disabled and no NICs"
                )
            ops = [stage_d2h()] if src_staged else []
            ops.append(nic_op(
                executor="src", family="am", mode="short", role="header",
                length=0, am_id=AM_ID_RNDV_HEADER,
            ))
            ops.append(nic_op(
                executor="dst", family="get", mode="zcopy", role="data", length=size,
                local_buf=DST_STAGE if dst_staged else DST_DATA,
                remote_buf=SRC_STAGE if src_staged else SRC_DATA,
            ))
            if dst_staged:
                ops.append(stage_h2d())
            return plan("gpu_intra_rndv_loopback", True, ops)

        if not rndv and src_kind == "gpu" and dst_kind == "gpu":
            return plan(
                "gpu_intra_eager",
                False,
                [
                    PlannedUctOp(
                        executor="src", family="get", mode="bcopy", transport="gdr_copy",
                        role="data", length=size, local_buf=SRC_STAGE, remote_buf=SRC_DATA,
                    ),
                    PlannedUctOp(
                        executor="src", family="am", mode="bcopy", transport="sysv",
                        role="data", length=size, am_id=AM_ID_EAGER,
                    ),
                    PlannedUctOp(
                        executor="dst", family="put", mode="short", transport="gdr_copy",
                        role="data", length=size, local_buf=DST_STAGE, remote_buf=DST_DATA,
                    ),
                ],
            )

        # host or mixed intra-node traffic rides sysv active messages
        return plan(
            "host_intra",
            False,
            [
                PlannedUctOp(
                    executor="src", family="am", mode=_am_mode(size), transport="sysv",
                    role="data", length=size, am_id=AM_ID_EAGER,
                )
            ],
        )

    # inter-node
    require_nics()

    if rndv:
        scheme = rndv_scheme()
        gpu_pattern = "gpu" if "gpu" in (src_kind, dst_kind) else "host"
        if scheme == "get":
            ops = [stage_d2h()] if src_staged else []
            ops.append(nic_op(
                executor="src", family="am", mode="short", role="header",
                length=0, am_id=AM_ID_RNDV_HEADER,
            ))
            ops.append(nic_op(
                executor="dst", family="get", mode="zcopy", role="data", length=size,
                local_buf=DST_STAGE if dst_staged else DST_DATA,
                remote_buf=SRC_STAGE if src_staged else SRC_DATA,
            ))
            if dst_staged:
                ops.append(stage_h2d())
            return plan(f"{gpu_pattern}_rndv_get", True, ops)
        # put scheme: device buffers are staged to the host first, then
        # written to the target with an RDMA write from the sender.
        ops = [stage_d2h()] if src_kind == "gpu" else []
        ops.append(nic_op(
            executor="src", family="put", mode="zcopy", role="data", length=size,
            local_buf=SRC_STAGE if src_kind == "gpu" else SRC_DATA,
            remote_buf=DST_STAGE if dst_staged else DST_DATA,
        ))
        if dst_staged:
            ops.append(stage_h2d())
        return plan(f"{gpu_pattern}_rndv_put", True, ops)

    # eager inter-node
    if src_kind == "gpu" or dst_kind == "gpu":
        ops = []
        if src_kind == "gpu":
            if src_staged:
                ops.append(stage_d2h())
            ops.append(nic_op(
                executor="src", family="am", mode="zcopy", role="data", length=size,
                local_buf=SRC_STAGE if src_staged else SRC_DATA,
                am_id=AM_ID_EAGER,
            ))
        else:
            ops.append(nic_op(
                executor="src", family="am", mode=_am_mode(size), role="data",
                length=size, am_id=AM_ID_EAGER,
            ))
        if dst_kind == "gpu":
            if dst_staged:
                ops.append(stage_h2d())
            else:
                ops.append(PlannedUctOp(
                    executor="dst", family="put", mode="short", transport="gdr_copy",
                    role="data", length=size, local_buf=DST_STAGE, remote_buf=DST_DATA,
                ))
        return plan("gpu_inter_eager", False, ops)

    return plan(
        "host_inter_eager",
        False,
        [
            nic_op(
                executor="src", family="am", mode=_am_mode(size), role="data",
                length=size, am_id=AM_ID_EAGER,
            )
        ],
    )
