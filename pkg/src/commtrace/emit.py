"""Deterministic trace emission: scenario -> per-process logs + ground truth.

Every logical message is expanded by `select_path`, materialized into
interface/endpoint/connection records (created lazily per channel), ucp
send/receive records and transport ops with call stacks, and scheduled on a
synthetic global clock. Per-node clock drift (plus optional per-process
jitter) is added to every timestamp of a node's processes at record-creation
time, so drift shifts timestamps and nothing else.

Everything - addresses, buffer carving, slot ids, timestamps - is a pure
function of (scenario, seed), so identical inputs produce identical bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .completion import CompletionRegistry
from .errors import ScenarioError
from .paths import DST_DATA, DST_STAGE, SRC_DATA, SRC_STAGE, PathPlan, select_path
from .plan import LogicalMessage, TagAllocator, plan_transfers
from .records import (
    AllocEvent,
    ConnectionRecord,
    EndpointRecord,
    InterfaceRecord,
    ProcessLog,
    ProcessMeta,
    UcpOp,
    UctOp,
)
from .topology import ClusterTopology, NodeSpec, ProtocolConfig, Scenario
from .truth import GroundTruth, GtMessage, GtUcp, GtUct

EPOCH = 1_000_000_000  # ns; leaves room for negative drift
MSG_SPACING = 10_000
ALLOC_LEAD = 100_000  # arena allocations precede the epoch by this much

GPU_ARENA_BASE = 0x7000_0000_0000
GPU_ARENA_STRIDE = 0x0100_0000_0000
GPU_ARENA_SPAN = 1 << 39
HOST_ARENA_BASE = 0x7F00_0000_0000
BUF_ALIGN = 256

_MD = {
    "sysv": "sysv",
    "cuda_ipc": "cuda",
    "cuda_copy": "cuda",
    "gdr_copy": "gdrcopy",
    "self": "self",
    "tcp": "tcp",
}


@dataclass
class _Proc:
    meta: ProcessMeta
    node: NodeSpec
    rank: int
    offset: int  # drift + jitter, ns
    log: ProcessLog = field(default_factory=ProcessLog)
    allocs: list[AllocEvent] = field(default_factory=list)
    next_seq: int = 0
    next_iface: int = 1
    next_ep: int = 101
    next_ucp_ep: int = 1001
    ifaces: dict = field(default_factory=dict)  # (transport, net_device) -> (id, addr)
    oneway_eps: dict = field(default_factory=dict)  # (transport, remote_uid) -> ep_id
    ucp_eps: dict = field(default_factory=dict)  # remote_uid -> (ucp_ep_id, managed list)
    gpu_offsets: dict = field(default_factory=dict)  # gpu -> next offset
    host_offset: int = 0
    registry: CompletionRegistry | None = None

    def t(self, when: int) -> int:
        return when + self.offset

    def seq(self) -> int:
        s = self.next_seq
        self.next_seq += 1
        return s


@dataclass
class SimulationResult:
    scenario: Scenario
    messages: list[LogicalMessage]
    processes: dict[str, _Proc]
    ground_truth: GroundTruth

    def logs(self) -> dict[str, ProcessLog]:
        return {uid: p.log for uid, p in self.processes.items()}

    def alloc_logs(self) -> dict[str, list[AllocEvent]]:
        return {uid: p.allocs for uid, p in self.processes.items()}


class _Emitter:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.topo = scenario.topology
        self.config = scenario.protocol
        self.rng = np.random.default_rng(scenario.protocol.seed)
        self.next_iface_addr = 1
        self.next_ep_addr = 1
        self.rc_channels: dict = {}  # (transport, src, dst, nic_s, nic_d) -> (ep_s, ep_d)
        self.truth = GroundTruth()
        self.procs: dict[str, _Proc] = {}
        for node in self.topo.nodes:
            drift = self.config.clock_drift_ns.get(node.name, 0)
            for rank in node.ranks:
                jitter = int(self.rng.integers(0, self.config.jitter_ns + 1))
                uid = self.topo.proc_uid(rank)
                meta = ProcessMeta(proc_uid=uid, rank=rank, node=node.name, pid=4000 + rank)
                proc = _Proc(meta=meta, node=node, rank=rank, offset=drift + jitter)
                proc.log.records.append(meta)
                proc.registry = CompletionRegistry(self.config.completion_pool_size)
                self.procs[uid] = proc

    # -- address/id allocation ------------------------------------------------

    def _iface_addr(self) -> bytes:
        addr = b"\xa1" + struct.pack(">Q", self.next_iface_addr)
        self.next_iface_addr += 1
        return addr

    def _ep_addr(self) -> bytes:
        addr = b"\xb2" + struct.pack(">Q", self.next_ep_addr)
        self.next_ep_addr += 1
        return addr

    def _ensure_iface(self, proc: _Proc, transport: str, net_device: str | None, t: int):
        key = (transport, net_device)
        if key in proc.ifaces:
            return proc.ifaces[key]
        iface_id = proc.next_iface
        proc.next_iface += 1
        addr = self._iface_addr()
        md = f"ib/{net_device}" if net_device else _MD.get(transport, transport)
        proc.log.records.append(
            InterfaceRecord(
                iface_id=iface_id,
                transport=transport,
                memory_domain=md,
                net_device=net_device,
                iface_addr=addr,
                t_create=proc.t(t),
            )
        )
        proc.ifaces[key] = (iface_id, addr)
        return proc.ifaces[key]

    def _new_ep(self, proc: _Proc, iface_id: int, t: int) -> tuple[int, bytes]:
        ep_id = proc.next_ep
        proc.next_ep += 1
        addr = self._ep_addr()
        proc.log.records.append(
            EndpointRecord(ep_id=ep_id, iface_id=iface_id, ep_addr=addr, t_create=proc.t(t))
        )
        return ep_id, addr

    def _ensure_oneway(self, proc: _Proc, transport: str, remote: _Proc, t: int) -> int:
        """Endpoint at `proc` connected to `remote`'s interface address."""
        key = (transport, remote.meta.proc_uid)
        if key in proc.oneway_eps:
            return proc.oneway_eps[key]
        _, remote_addr = self._ensure_iface(remote, transport, None, t)
        iface_id, _ = self._ensure_iface(proc, transport, None, t)
        ep_id, _ = self._new_ep(proc, iface_id, t)
        proc.log.records.append(
            ConnectionRecord(
                ep_id=ep_id,
                remote_addr=remote_addr,
                remote_kind_hint="iface",
                t_connect=proc.t(t + 500),
            )
        )
        proc.oneway_eps[key] = ep_id
        return ep_id

    def _ensure_rc(
        self, transport: str, src: _Proc, dst: _Proc,
        nic_src: str, nic_dst: str, t: int,
    ) -> tuple[int, int]:
        """Verbs channel: endpoint pair with mirrored ep->ep connections."""
        key = (transport, src.meta.proc_uid, dst.meta.proc_uid, nic_src, nic_dst)
        if key in self.rc_channels:
            return self.rc_channels[key]
        s_iface, _ = self._ensure_iface(src, transport, nic_src, t)
        d_iface, _ = self._ensure_iface(dst, transport, nic_dst, t)
        s_ep, s_addr = self._new_ep(src, s_iface, t)
        d_ep, d_addr = self._new_ep(dst, d_iface, t)
        src.log.records.append(
            ConnectionRecord(
                ep_id=s_ep, remote_addr=d_addr, remote_kind_hint="ep",
                t_connect=src.t(t + 500),
            )
        )
        dst.log.records.append(
            ConnectionRecord(
                ep_id=d_ep, remote_addr=s_addr, remote_kind_hint="ep",
                t_connect=dst.t(t + 500),
            )
        )
        self.rc_channels[key] = (s_ep, d_ep)
        return self.rc_channels[key]

    # -- memory ----------------------------------------------------------------

    def _gpu_carve(self, proc: _Proc, gpu: int, nbytes: int, t: int) -> int:
        if gpu not in proc.gpu_offsets:
            base = GPU_ARENA_BASE + gpu * GPU_ARENA_STRIDE
            proc.allocs.append(
                AllocEvent(
                    kind="alloc", device_index=gpu, base=base,
                    length=GPU_ARENA_SPAN, t=proc.t(EPOCH - ALLOC_LEAD),
                )
            )
            proc.gpu_offsets[gpu] = 0
        off = proc.gpu_offsets[gpu]
        size = max(BUF_ALIGN, (nbytes + BUF_ALIGN - 1) // BUF_ALIGN * BUF_ALIGN)
        if off + size > GPU_ARENA_SPAN:
            raise ScenarioError("gpu arena exhausted; reduce workload size")
        proc.gpu_offsets[gpu] = off + size
        return GPU_ARENA_BASE + gpu * GPU_ARENA_STRIDE + off

    def _host_carve(self, proc: _Proc, nbytes: int) -> int:
        off = proc.host_offset
        size = max(BUF_ALIGN, (nbytes + BUF_ALIGN - 1) // BUF_ALIGN * BUF_ALIGN)
        proc.host_offset = off + size
        return HOST_ARENA_BASE + off

    # -- per-message emission ---------------------------------------------------

    def emit_message(self, index: int, msg: LogicalMessage):
        path = select_path(msg, self.topo, self.config)
        src = self.procs[self.topo.proc_uid(msg.src_rank)]
        dst = self.procs[self.topo.proc_uid(msg.dst_rank)]
        T = EPOCH + index * MSG_SPACING

        # materialize the buffers this expansion references
        bufs: dict[str, tuple[_Proc, int, str, int | None]] = {}

        def materialize(symbol: str):
            if symbol in bufs:
                return
            side, kind_name = symbol.split("_")  # src/dst x data/stage
            proc = src if side == "src" else dst
            side_kind = path.src_kind if side == "src" else path.dst_kind
            side_gpu = path.src_gpu if side == "src" else path.dst_gpu
            if kind_name == "data" and side_kind == "gpu":
                addr = self._gpu_carve(proc, side_gpu, msg.bytes, T)
                bufs[symbol] = (proc, addr, "gpu", side_gpu)
            else:
                addr = self._host_carve(proc, msg.bytes)
                bufs[symbol] = (proc, addr, "host", None)

        materialize(SRC_DATA)
        materialize(DST_DATA)
        for op in path.ops:
            for sym in (op.local_buf, op.remote_buf):
                if sym is not None:
                    materialize(sym)

        # channels first so managed endpoint lists are complete before the
        # ucp send record is written
        op_eps: list[int] = []
        managed: list[int] = []
        for op in path.ops:
            executor = src if op.executor == "src" else dst
            remote = dst if op.executor == "src" else src
            if op.transport in ("rc_mlx5", "dc_mlx5"):
                s_ep, d_ep = self._ensure_rc(
                    op.transport, src, dst, op.nic_src, op.nic_dst, T - 3000
                )
                ep_id = s_ep if op.executor == "src" else d_ep
                if s_ep not in managed:
                    managed.append(s_ep)
            elif op.transport in ("gdr_copy", "cuda_copy", "self"):
                ep_id = self._ensure_oneway(executor, op.transport, executor, T - 3000)
                if op.executor == "src" and ep_id not in managed:
                    managed.append(ep_id)
            else:  # sysv / cuda_ipc: endpoint at the executor towards the peer
                ep_id = self._ensure_oneway(executor, op.transport, remote, T - 3000)
                if op.executor == "src" and ep_id not in managed:
                    managed.append(ep_id)
            op_eps.append(ep_id)

        # ucp layer records
        ucp_ep_id, managed_all = src.ucp_eps.setdefault(
            dst.meta.proc_uid, (src.next_ucp_ep, [])
        )
        if ucp_ep_id == src.next_ucp_ep:
            src.next_ucp_ep += 1
        for ep in managed:
            if ep not in managed_all:
                managed_all.append(ep)

        recv_mpi = "MPI_Irecv" if msg.mpi_fn == "MPI_Isend" else msg.mpi_fn
        send_seq = src.seq()
        send_rec = UcpOp(
            seq=send_seq,
            dir="send",
            tag=msg.tag,
            buffer=bufs[SRC_DATA][1],
            length=msg.bytes,
            ucp_ep_id=ucp_ep_id,
            managed_uct_eps=tuple(managed_all),
            peer_proc_id=dst.meta.proc_uid,
            t_start=src.t(T),
            t_end=src.t(T + 7000),
            callstack=("ucp_tag_send_nbx", msg.mpi_fn, "main"),
        )
        src.log.records.append(send_rec)
        recv_seq = dst.seq()
        recv_rec = UcpOp(
            seq=recv_seq,
            dir="recv",
            tag=msg.tag,
            buffer=bufs[DST_DATA][1],
            length=msg.bytes,
            ucp_ep_id=None,
            managed_uct_eps=None,
            peer_proc_id=src.meta.proc_uid,
            t_start=dst.t(T + 100),
            t_end=dst.t(T + 8000),
            callstack=("ucp_tag_recv_nbx", recv_mpi, "main"),
        )
        dst.log.records.append(recv_rec)
        send_ref = (src.meta.proc_uid, send_seq)
        recv_ref = (dst.meta.proc_uid, recv_seq)
        self.truth.ucp.append(
            GtUcp(src.meta.proc_uid, send_seq, dst.meta.proc_uid, recv_ref)
        )
        self.truth.ucp.append(
            GtUcp(dst.meta.proc_uid, recv_seq, src.meta.proc_uid, send_ref)
        )

        # transport ops
        groups: dict[str, tuple] = {}
        n_zcopy = {"src": 0, "dst": 0}
        for op in path.ops:
            if op.mode == "zcopy":
                n_zcopy[op.executor] += 1

        for k, op in enumerate(path.ops):
            executor = src if op.executor == "src" else dst
            base = T + (500 if op.executor == "src" else 4000) + 400 * k
            if op.mode == "zcopy":
                duration = max(100, op.length // 1000)
            elif op.mode == "bcopy":
                duration = 80
            else:
                duration = 50
            slot = None
            if op.mode == "zcopy":
                if op.executor not in groups:
                    reg = executor.registry
                    groups[op.executor] = (
                        reg,
                        reg.make_group(n_zcopy[op.executor], f"msg{index}:{op.executor}"),
                    )
                reg, group = groups[op.executor]
                slot = reg.acquire(group)

            remote_get = (
                path.rndv
                and op.family == "get"
                and op.mode == "zcopy"
                and op.role == "data"
                and op.executor == "dst"
            )
            mpi_frame = "MPI_Wait" if remote_get else msg.mpi_fn
            layer = (
                "ucp_rndv_progress"
                if path.rndv and op.role in ("data", "header")
                else ("ucp_tag_send_nbx" if op.executor == "src" else "ucp_am_handler")
            )
            local = bufs[op.local_buf][1] if op.local_buf else None
            remote_b = bufs[op.remote_buf][1] if op.remote_buf else None
            seq = executor.seq()
            rec = UctOp(
                seq=seq,
                family=op.family,
                mode=op.mode,
                ep_id=op_eps[k],
                length=op.length,
                local_buf=local,
                remote_buf=remote_b,
                am_id=op.am_id,
                completion_slot=slot,
                t_start=executor.t(base),
                t_complete=executor.t(base + duration),
                callstack=(f"uct_ep_{op.family}_{op.mode}", layer, mpi_frame, "main"),
            )
            executor.log.records.append(rec)
            if slot is not None:
                reg, _group = groups[op.executor]
                reg.on_complete(slot, 0, executor.t(base + duration))
                reg.release(slot)

            self.truth.uct.append(self._gt_for(op, path, msg, executor, src, dst, seq,
                                                bufs, send_ref, recv_ref, index))

        self.truth.messages.append(
            GtMessage(
                index=index,
                src_rank=msg.src_rank,
                dst_rank=msg.dst_rank,
                bytes=msg.bytes,
                mpi_fn=msg.mpi_fn,
                tag=msg.tag,
                pattern=path.pattern,
                data_hops=path.data_hops,
            )
        )

    def _gt_for(self, op, path: PathPlan, msg, executor: _Proc, src: _Proc, dst: _Proc,
                seq: int, bufs, send_ref, recv_ref, index: int) -> GtUct:
        """Ground-truth attribution for one emitted op (what a correct
        correlator recovers): buffer placement where buffers exist, the ucp
        pair's endpoint kinds where they do not."""
        # data-flow source/target sides in terms of (local, remote)
        if op.family == "get":
            flow_src_sym, flow_dst_sym = op.remote_buf, op.local_buf
        else:
            flow_src_sym, flow_dst_sym = op.local_buf, op.remote_buf

        def side_info(sym: str | None, ucp_side: str):
            if sym is not None:
                _proc, _addr, kind, gpu = bufs[sym]
                return kind, gpu
            if ucp_side == "src":
                return path.src_kind, path.src_gpu
            return path.dst_kind, path.dst_gpu

        src_kind, src_gpu = side_info(flow_src_sym, "src")
        dst_kind, dst_gpu = side_info(flow_dst_sym, "dst")

        # process pair in data-flow direction
        if op.transport in ("gdr_copy", "cuda_copy", "self"):
            src_proc = dst_proc = executor.meta.proc_uid
        elif op.family == "get":
            src_proc, dst_proc = (
                (dst if op.executor == "src" else src).meta.proc_uid,
                executor.meta.proc_uid,
            )
        else:
            src_proc = executor.meta.proc_uid
            dst_proc = (dst if op.executor == "src" else src).meta.proc_uid

        return GtUct(
            proc=executor.meta.proc_uid,
            seq=seq,
            src_proc=src_proc,
            dst_proc=dst_proc,
            src_kind=src_kind,
            dst_kind=dst_kind,
            src_gpu=src_gpu if src_kind == "gpu" else None,
            dst_gpu=dst_gpu if dst_kind == "gpu" else None,
            src_nic=op.nic_src,
            dst_nic=op.nic_dst,
            ucp_send=send_ref,
            ucp_recv=recv_ref,
            mpi_fn=msg.mpi_fn,
            pattern=path.pattern,
            role=op.role,
            message=index,
        )


def emit(scenario: Scenario) -> SimulationResult:
    """Run the simulator: plan all workloads, expand and schedule every
    message, and return per-process logs plus the ground truth."""
    emitter = _Emitter(scenario)
    tags = TagAllocator()
    messages: list[LogicalMessage] = []
    for workload in scenario.workloads:
        messages.extend(plan_transfers(workload, scenario.topology, tags))
    for index, msg in enumerate(messages):
        emitter.emit_message(index, msg)
    for proc in emitter.procs.values():
        leaked = proc.registry.pending()
        if leaked:  # pragma: no cover - structural guarantee
            raise ScenarioError(f"leaked completion slots in {proc.meta.proc_uid}: {leaked}")
    return SimulationResult(
        scenario=scenario,
        messages=messages,
        processes=emitter.procs,
        ground_truth=emitter.truth,
    )
