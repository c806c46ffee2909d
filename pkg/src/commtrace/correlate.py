"""Log processing: merge per-process logs into a curated, attributed trace.

Four matching tasks run in a fixed order, then MPI attribution:

1. link transport ops to remote processes via connection records and
   interface/endpoint address equality;
2. attribute buffer addresses to GPUs via allocation intervals;
3. match ucp sends with ucp receives by peer id and tag;
4. associate transport ops with ucp pairs via endpoint management and
   buffer containment (a temporal-window fallback covers active messages
   and buffered copies, which expose no buffers);
5. pick each op's MPI function from the associated ucp send's call stack,
   falling back to the op's own stack.

Individual failures become MatchReport entries; the pipeline is total on
well-formed input. The strict single-task entry points raise instead.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field

from .curated import CuratedComm, CuratedTrace, UcpLink, UcpPairRec
from .errors import (
    AmbiguousAssociation,
    AmbiguousRemote,
    CorrelationError,
    NoConnection,
    OrphanUct,
    ScenarioError,
)
from .records import (
    AllocEvent,
    ConnectionRecord,
    EndpointRecord,
    InterfaceRecord,
    NIC_TRANSPORTS,
    ProcessLog,
    UcpOp,
    UctOp,
)
from .topology import ClusterTopology

ASSOC_EPS_NS = 1_000  # slack on the ucp window for bufferless association

REPORT_SCHEMA_VERSION = 1


@dataclass
class TraceSet:
    processes: dict[str, ProcessLog]
    allocs: dict[str, list[AllocEvent]] = field(default_factory=dict)
    topology: ClusterTopology | None = None

    def __post_init__(self):
        if not self.processes:
            raise ScenarioError("trace set needs at least one process")
        ranks: dict[int, str] = {}
        for uid, log in self.processes.items():
            meta = log.meta
            if meta.proc_uid != uid:
                raise ScenarioError(f"log keyed {uid!r} has meta proc_uid {meta.proc_uid!r}")
            if meta.rank in ranks:
                raise ScenarioError(
                    f"rank {meta.rank} claimed by both {ranks[meta.rank]} and {uid}"
                )
            ranks[meta.rank] = uid


@dataclass
class AttributionOptions:
    ucp_attribution: bool = True
    mpi_attribution: bool = True
    device_attribution: bool = True


@dataclass
class MatchProblem:
    kind: str
    proc: str
    seq: int
    detail: str

    def to_doc(self) -> dict:
        return {"kind": self.kind, "proc": self.proc, "seq": self.seq, "detail": self.detail}


@dataclass
class MatchReport:
    total_uct: int = 0
    linked: int = 0
    unlinked: int = 0
    ucp_sends: int = 0
    ucp_recvs: int = 0
    matched_pairs: int = 0
    unmatched_sends: int = 0
    unmatched_recvs: int = 0
    associated: int = 0
    orphaned: int = 0
    device_attributions: int = 0
    ambiguities: list[MatchProblem] = field(default_factory=list)
    problems: list[MatchProblem] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "counts": {
                "total_uct": self.total_uct,
                "linked": self.linked,
                "unlinked": self.unlinked,
                "ucp_sends": self.ucp_sends,
                "ucp_recvs": self.ucp_recvs,
                "matched_pairs": self.matched_pairs,
                "unmatched_sends": self.unmatched_sends,
                "unmatched_recvs": self.unmatched_recvs,
                "associated": self.associated,
                "orphaned": self.orphaned,
                "device_attributions": self.device_attributions,
            },
            "ambiguities": [p.to_doc() for p in self.ambiguities],
            "problems": [p.to_doc() for p in self.problems],
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_doc(), indent=2) + "\n"


# ---------------------------------------------------------------------------
# task 1: link transport ops to remote processes

@dataclass
class LinkInfo:
    executor: str
    remote: str
    src_proc: str
    dst_proc: str
    local_iface: InterfaceRecord
    remote_iface: InterfaceRecord | None


class _LinkIndex:
    def __init__(self, traces: TraceSet):
        self.eps: dict[str, dict[int, EndpointRecord]] = {}
        self.ifaces: dict[str, dict[int, InterfaceRecord]] = {}
        self.conns: dict[str, dict[int, list[ConnectionRecord]]] = {}
        self.iface_by_addr: dict[bytes, list[tuple[str, InterfaceRecord]]] = {}
        self.ep_by_addr: dict[bytes, list[tuple[str, EndpointRecord]]] = {}
        for uid, log in traces.processes.items():
            self.eps[uid] = {e.ep_id: e for e in log.endpoints}
            self.ifaces[uid] = {i.iface_id: i for i in log.ifaces}
            per_ep: dict[int, list[ConnectionRecord]] = {}
            for c in log.connections:
                per_ep.setdefault(c.ep_id, []).append(c)
            for lst in per_ep.values():
                lst.sort(key=lambda c: c.t_connect)
            self.conns[uid] = per_ep
            for i in log.ifaces:
                if i.iface_addr is not None:
                    self.iface_by_addr.setdefault(i.iface_addr, []).append((uid, i))
            for e in log.endpoints:
                if e.ep_addr is not None:
                    self.ep_by_addr.setdefault(e.ep_addr, []).append((uid, e))

    def latest_conn(self, uid: str, ep_id: int, t: int) -> ConnectionRecord | None:
        conns = self.conns[uid].get(ep_id, [])
        times = [c.t_connect for c in conns]
        i = bisect_right(times, t)
        return conns[i - 1] if i else None


def _resolve_remote(
    index: _LinkIndex, uid: str, conn: ConnectionRecord, local_ep: EndpointRecord
) -> tuple[str, InterfaceRecord]:
    """Identify the process owning the connection's remote address."""
    ifs = index.iface_by_addr.get(conn.remote_addr, [])
    if len(ifs) == 1:
        return ifs[0]
    if len(ifs) > 1:
        raise AmbiguousRemote(
            "interface address collision", sorted(u for u, _ in ifs)
        )
    eps = index.ep_by_addr.get(conn.remote_addr, [])
    if len(eps) > 1 and local_ep.ep_addr is not None:
        # disambiguate via the most recent mirroring connection not after ours
        mirrored = []
        for r_uid, r_ep in eps:
            for r_conn in index.conns[r_uid].get(r_ep.ep_id, []):
                if r_conn.remote_addr == local_ep.ep_addr and r_conn.t_connect <= conn.t_connect:
                    mirrored.append((r_conn.t_connect, r_uid, r_ep))
        if mirrored:
            mirrored.sort(key=lambda m: m[0])
            latest = [m for m in mirrored if m[0] == mirrored[-1][0]]
            if len(latest) == 1:
                _, r_uid, r_ep = latest[0]
                return r_uid, index.ifaces[r_uid][r_ep.iface_id]
        raise AmbiguousRemote("endpoint address collision", sorted(u for u, _ in eps))
    if len(eps) == 1:
        r_uid, r_ep = eps[0]
        return r_uid, index.ifaces[r_uid][r_ep.iface_id]
    raise NoConnection(f"remote address {conn.remote_addr.hex()} matches no process")


def _link_ops(traces: TraceSet) -> tuple[dict[tuple[str, int], LinkInfo], list[MatchProblem]]:
    index = _LinkIndex(traces)
    links: dict[tuple[str, int], LinkInfo] = {}
    problems: list[MatchProblem] = []
    for uid in sorted(traces.processes):
        log = traces.processes[uid]
        for op in log.uct_ops:
            conn = index.latest_conn(uid, op.ep_id, op.t_start)
            if conn is None:
                problems.append(
                    MatchProblem("no_connection", uid, op.seq, f"ep {op.ep_id} never connected")
                )
                continue
            local_ep = index.eps[uid][op.ep_id]
            try:
                remote_uid, remote_iface = _resolve_remote(index, uid, conn, local_ep)
            except (NoConnection, AmbiguousRemote) as exc:
                kind = "ambiguous_remote" if isinstance(exc, AmbiguousRemote) else "no_connection"
                problems.append(MatchProblem(kind, uid, op.seq, str(exc)))
                continue
            if op.family == "get":
                src_proc, dst_proc = remote_uid, uid
            else:
                src_proc, dst_proc = uid, remote_uid
            links[(uid, op.seq)] = LinkInfo(
                executor=uid,
                remote=remote_uid,
                src_proc=src_proc,
                dst_proc=dst_proc,
                local_iface=index.ifaces[uid][local_ep.iface_id],
                remote_iface=remote_iface,
            )
    return links, problems


def link_uct_to_processes(traces: TraceSet) -> dict[tuple[str, int], tuple[str, str]]:
    """Strict task 1: (proc, seq) -> (src_proc, dst_proc); raises on failure."""
    links, problems = _link_ops(traces)
    if problems:
        p = problems[0]
        if p.kind == "ambiguous_remote":
            raise AmbiguousRemote(f"{p.proc} seq {p.seq}: {p.detail}", [])
        raise NoConnection(f"{p.proc} seq {p.seq}: {p.detail}")
    return {key: (li.src_proc, li.dst_proc) for key, li in links.items()}


# ---------------------------------------------------------------------------
# task 2: device attribution

@dataclass
class _Interval:
    base: int
    end: int
    device: int
    t_alloc: int
    t_free: int | None  # None = live until end of trace


class DeviceMap:
    """Per-process allocation intervals with point-in-time lookup."""

    def __init__(self, allocs: dict[str, list[AllocEvent]]):
        self._intervals: dict[str, list[_Interval]] = {}
        for uid, events in allocs.items():
            intervals: list[_Interval] = []
            open_by_base: dict[int, _Interval] = {}
            for ev in events:
                if ev.kind == "alloc":
                    iv = _Interval(ev.base, ev.base + ev.length, ev.device_index, ev.t, None)
                    intervals.append(iv)
                    open_by_base[ev.base] = iv
                else:
                    iv = open_by_base.pop(ev.base, None)
                    if iv is not None:
                        iv.t_free = ev.t
            self._intervals[uid] = intervals

    def lookup(self, uid: str, addr: int, t: int) -> int | None:
        """Device owning `addr` at time `t`, or None for host memory."""
        for iv in self._intervals.get(uid, []):
            if iv.base <= addr < iv.end and iv.t_alloc <= t and (
                iv.t_free is None or t < iv.t_free
            ):
                return iv.device
        return None


def attribute_devices(traces: TraceSet) -> dict[tuple[str, int], dict[str, int | None]]:
    """Task 2 over op-local views: device tags for each op's own buffers."""
    devices = DeviceMap(traces.allocs)
    links, _ = _link_ops(traces)
    out: dict[tuple[str, int], dict[str, int | None]] = {}
    for uid in sorted(traces.processes):
        for op in traces.processes[uid].uct_ops:
            local = (
                devices.lookup(uid, op.local_buf, op.t_start)
                if op.local_buf is not None
                else None
            )
            remote = None
            li = links.get((uid, op.seq))
            if op.remote_buf is not None and li is not None:
                remote = devices.lookup(li.remote, op.remote_buf, op.t_start)
            out[(uid, op.seq)] = {"local": local, "remote": remote}
    return out


# ---------------------------------------------------------------------------
# task 3: ucp send/receive matching

def match_ucp_pairs(
    traces: TraceSet,
) -> tuple[list[UcpPairRec], list[MatchProblem]]:
    """Pair tagged sends with receives per (send proc, recv proc, tag).

    Within a group, the earliest send matches the earliest receive (sends
    ordered by start time, receives by end time, seq as tiebreak). With
    per-pair-unique tags this is immune to inter-node clock drift.
    """
    sends: dict[tuple[str, str, int], list[tuple[str, UcpOp]]] = {}
    recvs: dict[tuple[str, str, int], list[tuple[str, UcpOp]]] = {}
    problems: list[MatchProblem] = []
    for uid in sorted(traces.processes):
        for op in traces.processes[uid].ucp_ops:
            if op.peer_proc_id is None:
                problems.append(
                    MatchProblem(
                        f"unmatched_{op.dir}", uid, op.seq, "no peer_proc_id recorded"
                    )
                )
                continue
            if op.dir == "send":
                sends.setdefault((uid, op.peer_proc_id, op.tag), []).append((uid, op))
            else:
                recvs.setdefault((op.peer_proc_id, uid, op.tag), []).append((uid, op))

    pairs: list[UcpPairRec] = []
    for key in sorted(sends, key=lambda k: (k[0], k[1], k[2])):
        group_sends = sorted(sends[key], key=lambda e: (e[1].t_start, e[1].seq))
        group_recvs = sorted(recvs.pop(key, []), key=lambda e: (e[1].t_end, e[1].seq))
        for (s_uid, s_op), (r_uid, r_op) in zip(group_sends, group_recvs):
            pairs.append(UcpPairRec(send_proc=s_uid, send=s_op, recv_proc=r_uid, recv=r_op))
        for s_uid, s_op in group_sends[len(group_recvs):]:
            problems.append(
                MatchProblem("unmatched_send", s_uid, s_op.seq, f"tag {s_op.tag:#x}")
            )
        for r_uid, r_op in group_recvs[len(group_sends):]:
            problems.append(
                MatchProblem("unmatched_recv", r_uid, r_op.seq, f"tag {r_op.tag:#x}")
            )
    for key in sorted(recvs, key=lambda k: (k[0], k[1], k[2])):
        for r_uid, r_op in recvs[key]:
            problems.append(
                MatchProblem("unmatched_recv", r_uid, r_op.seq, f"tag {r_op.tag:#x}")
            )
    pairs.sort(key=lambda p: (p.send_proc, p.send.seq))
    return pairs, problems


# ---------------------------------------------------------------------------
# task 4: associating transport ops with ucp pairs

def _flow_bufs(op: UctOp) -> tuple[int | None, int | None]:
    """(source-side, target-side) buffers in data-flow direction."""
    if op.family == "get":
        return op.remote_buf, op.local_buf
    return op.local_buf, op.remote_buf


def _contains(base: int, length: int, addr: int | None) -> bool:
    return addr is not None and base <= addr < base + max(1, length)


def associate_uct_to_ucp(
    traces: TraceSet,
    links: dict[tuple[str, int], LinkInfo],
    pairs: list[UcpPairRec],
) -> tuple[dict[tuple[str, int], int], list[MatchProblem]]:
    """Map (proc, seq) -> index into `pairs`; unassociated ops are reported.

    Buffer comparison is ownership-aware: virtual addresses are only
    meaningful within one process, so an op buffer is tested against the ucp
    send buffer only when both live in the send process (same for the
    receive side). Ops with no usable buffer evidence (active messages,
    buffered copies, staged transfers through bounce buffers) fall back to
    same-process temporal containment in the ucp window, with a cumulative
    byte-feasibility guard.
    """
    by_sd: dict[tuple[str, str], list[int]] = {}
    by_participant: dict[str, list[int]] = {}
    for i, pr in enumerate(pairs):
        by_sd.setdefault((pr.send_proc, pr.recv_proc), []).append(i)
        by_participant.setdefault(pr.send_proc, []).append(i)
        if pr.recv_proc != pr.send_proc:
            by_participant.setdefault(pr.recv_proc, []).append(i)

    assoc: dict[tuple[str, int], int] = {}
    problems: list[MatchProblem] = []
    fallback_bytes: dict[int, int] = {}

    ops = []
    for uid in sorted(traces.processes):
        for op in traces.processes[uid].uct_ops:
            ops.append((uid, op))
    ops.sort(key=lambda e: (e[0], e[1].seq))

    for uid, op in ops:
        li = links.get((uid, op.seq))
        if li is None:
            problems.append(MatchProblem("orphan_uct", uid, op.seq, "op is unlinked"))
            continue
        if li.src_proc != li.dst_proc:
            cand = list(by_sd.get((li.src_proc, li.dst_proc), []))
        else:
            cand = list(dict.fromkeys(by_participant.get(uid, [])))

        # endpoint-management check applies to ops executed in the send process
        cand = [
            i
            for i in cand
            if uid != pairs[i].send_proc
            or (
                pairs[i].send.managed_uct_eps is not None
                and op.ep_id in pairs[i].send.managed_uct_eps
            )
        ]

        flow_src, flow_dst = _flow_bufs(op)
        if op.family == "get":
            src_owner, dst_owner = li.remote, uid
        else:
            src_owner, dst_owner = uid, li.remote

        hits = []
        for i in cand:
            pr = pairs[i]
            if (
                src_owner == pr.send_proc
                and _contains(pr.send.buffer, pr.send.length, flow_src)
            ) or (
                dst_owner == pr.recv_proc
                and _contains(pr.recv.buffer, pr.recv.length, flow_dst)
            ):
                hits.append(i)
        used_fallback = False
        if not hits:
            # temporal fallback inside the same-process ucp window
            used_fallback = True
            op_end = op.t_complete if op.t_complete is not None else op.t_start
            for i in cand:
                pr = pairs[i]
                if uid == pr.send_proc:
                    window = pr.send
                elif uid == pr.recv_proc:
                    window = pr.recv
                else:
                    continue
                if window.t_start <= op.t_start and op_end <= window.t_end + ASSOC_EPS_NS:
                    if op.length == 0 or (
                        fallback_bytes.get(i, 0) + op.length <= max(0, pr.send.length)
                    ):
                        hits.append(i)

        if len(hits) == 1:
            assoc[(uid, op.seq)] = hits[0]
            if used_fallback:
                fallback_bytes[hits[0]] = fallback_bytes.get(hits[0], 0) + op.length
        elif not hits:
            problems.append(MatchProblem("orphan_uct", uid, op.seq, "no candidate ucp pair"))
        else:
            problems.append(
                MatchProblem(
                    "ambiguous_association", uid, op.seq, f"{len(hits)} candidate pairs"
                )
            )
    return assoc, problems


# ---------------------------------------------------------------------------
# MPI attribution

def _innermost_mpi(frames: tuple[str, ...]) -> str | None:
    for frame in frames:
        if frame.startswith("MPI_"):
            return frame
    return None


def attribute_mpi(
    traces: TraceSet,
    pairs: list[UcpPairRec],
    assoc: dict[tuple[str, int], int],
    options: AttributionOptions,
) -> dict[tuple[str, int], str | None]:
    out: dict[tuple[str, int], str | None] = {}
    for uid in sorted(traces.processes):
        for op in traces.processes[uid].uct_ops:
            if not options.mpi_attribution:
                out[(uid, op.seq)] = None
                continue
            fn = None
            if options.ucp_attribution and (uid, op.seq) in assoc:
                fn = _innermost_mpi(pairs[assoc[(uid, op.seq)]].send.callstack)
            if fn is None:
                fn = _innermost_mpi(op.callstack)
            out[(uid, op.seq)] = fn
    return out


# ---------------------------------------------------------------------------
# full pipeline

def build_curated(
    traces: TraceSet, options: AttributionOptions | None = None
) -> tuple[CuratedTrace, MatchReport]:
    options = options or AttributionOptions()
    report = MatchReport()

    links, link_problems = _link_ops(traces)
    report.problems.extend(link_problems)
    report.ambiguities.extend(p for p in link_problems if p.kind == "ambiguous_remote")

    if options.device_attribution:
        devices = DeviceMap(traces.allocs)
        missing = sorted(set(traces.processes) - set(traces.allocs))
        if missing:
            report.notes.append(
                "no allocation log for: " + ", ".join(missing) + "; buffers default to host"
            )
    else:
        devices = DeviceMap({})
        report.notes.append("device attribution disabled; all endpoints reported as host")

    pairs, pair_problems = match_ucp_pairs(traces)
    report.problems.extend(pair_problems)

    if options.ucp_attribution:
        assoc, assoc_problems = associate_uct_to_ucp(traces, links, pairs)
        report.problems.extend(assoc_problems)
        report.ambiguities.extend(
            p for p in assoc_problems if p.kind == "ambiguous_association"
        )
    else:
        assoc = {}
        report.notes.append("ucp attribution disabled")

    mpi = attribute_mpi(traces, pairs, assoc, options)

    pair_index: dict[int, UcpLink] = {
        i: UcpLink(pr.send_proc, pr.send.seq, pr.recv_proc, pr.recv.seq)
        for i, pr in enumerate(pairs)
    }

    comms: list[CuratedComm] = []
    for uid in sorted(traces.processes):
        for op in traces.processes[uid].uct_ops:
            report.total_uct += 1
            li = links.get((uid, op.seq))
            if li is None:
                report.unlinked += 1
                continue
            report.linked += 1
            pair_i = assoc.get((uid, op.seq))
            pr = pairs[pair_i] if pair_i is not None else None

            flow_src, flow_dst = _flow_bufs(op)
            # owner of each buffer: local buffer belongs to the executor,
            # remote buffer to the linked peer
            if op.family == "get":
                src_buf_owner, dst_buf_owner = li.remote, uid
            else:
                src_buf_owner, dst_buf_owner = uid, li.remote

            def side(buf, owner, ucp_side):
                if buf is not None:
                    # times are only comparable within one process's clock:
                    # for a buffer owned by the peer, use the associated ucp
                    # op's timestamp from the owner's own log
                    t = op.t_start
                    if owner != uid and pr is not None:
                        if ucp_side == "src" and pr.send_proc == owner:
                            t = pr.send.t_start
                        elif ucp_side == "dst" and pr.recv_proc == owner:
                            t = pr.recv.t_start
                    return devices.lookup(owner, buf, t)
                if pr is not None:
                    if ucp_side == "src":
                        return devices.lookup(pr.send_proc, pr.send.buffer, pr.send.t_start)
                    return devices.lookup(pr.recv_proc, pr.recv.buffer, pr.recv.t_start)
                return None

            src_gpu = side(flow_src, src_buf_owner, "src")
            dst_gpu = side(flow_dst, dst_buf_owner, "dst")
            report.device_attributions += (src_gpu is not None) + (dst_gpu is not None)

            transport = li.local_iface.transport
            if transport in NIC_TRANSPORTS:
                local_nic = li.local_iface.net_device
                remote_nic = li.remote_iface.net_device if li.remote_iface else None
                if op.family == "get":
                    src_nic, dst_nic = remote_nic, local_nic
                else:
                    src_nic, dst_nic = local_nic, remote_nic
            else:
                src_nic = dst_nic = None

            if pair_i is not None:
                report.associated += 1

            comms.append(
                CuratedComm(
                    proc=uid,
                    seq=op.seq,
                    family=op.family,
                    mode=op.mode,
                    ep_id=op.ep_id,
                    length=op.length,
                    local_buf=op.local_buf,
                    remote_buf=op.remote_buf,
                    am_id=op.am_id,
                    completion_slot=op.completion_slot,
                    t_start=op.t_start,
                    t_complete=op.t_complete,
                    callstack=op.callstack,
                    src_proc=li.src_proc,
                    dst_proc=li.dst_proc,
                    src_endpoint_kind="gpu" if src_gpu is not None else "host",
                    dst_endpoint_kind="gpu" if dst_gpu is not None else "host",
                    src_gpu=src_gpu,
                    dst_gpu=dst_gpu,
                    src_nic=src_nic,
                    dst_nic=dst_nic,
                    mpi_fn=mpi.get((uid, op.seq)),
                    ucp_link=pair_index.get(pair_i) if pair_i is not None else None,
                    transport=transport,
                )
            )

    report.orphaned = report.linked - report.associated
    report.ucp_sends = sum(
        1 for log in traces.processes.values() for o in log.ucp_ops if o.dir == "send"
    )
    report.ucp_recvs = sum(
        1 for log in traces.processes.values() for o in log.ucp_ops if o.dir == "recv"
    )
    report.matched_pairs = len(pairs)
    report.unmatched_sends = sum(1 for p in pair_problems if p.kind == "unmatched_send")
    report.unmatched_recvs = sum(1 for p in pair_problems if p.kind == "unmatched_recv")

    comms.sort(key=lambda c: (c.src_proc, c.proc, c.seq))
    processes = sorted(
        (log.meta for log in traces.processes.values()), key=lambda m: m.rank
    )
    trace = CuratedTrace(
        topology=traces.topology,
        processes=list(processes),
        comms=comms,
        ucp_pairs=pairs,
    )
    return trace, report
