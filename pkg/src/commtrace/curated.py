"""Curated trace: the merged, fully attributed cross-process communication set.

Stored as a single versioned JSON document (schema_version 1) holding the
topology, the process table, the attributed communication list and the
matched ucp send/receive pairs. Reading and writing are exact inverses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import InvariantViolation, MalformedRecord, VersionMismatch
from .records import ENDPOINT_KINDS, NIC_TRANSPORTS, TRANSPORTS, ProcessMeta, UcpOp
from .topology import ClusterTopology

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class UcpLink:
    send_proc: str
    send_seq: int
    recv_proc: str
    recv_seq: int

    def to_doc(self) -> dict:
        return {
            "send": [self.send_proc, self.send_seq],
            "recv": [self.recv_proc, self.recv_seq],
        }


@dataclass(frozen=True)
class CuratedComm:
    """One transport-level operation with full cross-process attribution."""

    proc: str  # process that executed the op
    seq: int
    family: str
    mode: str
    ep_id: int
    length: int
    local_buf: int | None
    remote_buf: int | None
    am_id: int | None
    completion_slot: int | None
    t_start: int
    t_complete: int | None
    callstack: tuple[str, ...]
    src_proc: str
    dst_proc: str
    src_endpoint_kind: str
    dst_endpoint_kind: str
    src_gpu: int | None
    dst_gpu: int | None
    src_nic: str | None
    dst_nic: str | None
    mpi_fn: str | None
    ucp_link: UcpLink | None
    transport: str

    def __post_init__(self):
        if self.src_endpoint_kind not in ENDPOINT_KINDS:
            raise InvariantViolation(f"bad src_endpoint_kind {self.src_endpoint_kind!r}")
        if self.dst_endpoint_kind not in ENDPOINT_KINDS:
            raise InvariantViolation(f"bad dst_endpoint_kind {self.dst_endpoint_kind!r}")
        if (self.src_gpu is not None) != (self.src_endpoint_kind == "gpu"):
            raise InvariantViolation("src_gpu present iff src_endpoint_kind=gpu")
        if (self.dst_gpu is not None) != (self.dst_endpoint_kind == "gpu"):
            raise InvariantViolation("dst_gpu present iff dst_endpoint_kind=gpu")
        if self.transport not in TRANSPORTS:
            raise InvariantViolation(f"unknown transport {self.transport!r}")
        has_nic = self.transport in NIC_TRANSPORTS
        if (self.src_nic is not None) != has_nic or (self.dst_nic is not None) != has_nic:
            raise InvariantViolation("NIC fields present iff transport is rc_mlx5/dc_mlx5")
        object.__setattr__(self, "callstack", tuple(self.callstack))

    @property
    def uct_fn(self) -> str:
        return f"{self.family}_{self.mode}"

    def to_doc(self) -> dict:
        doc: dict[str, Any] = {
            "proc": self.proc,
            "seq": self.seq,
            "family": self.family,
            "mode": self.mode,
            "ep_id": self.ep_id,
            "length": self.length,
        }
        if self.local_buf is not None:
            doc["local_buf"] = self.local_buf
        if self.remote_buf is not None:
            doc["remote_buf"] = self.remote_buf
        if self.am_id is not None:
            doc["am_id"] = self.am_id
        if self.completion_slot is not None:
            doc["completion_slot"] = self.completion_slot
        doc["t_start"] = self.t_start
        if self.t_complete is not None:
            doc["t_complete"] = self.t_complete
        doc["callstack"] = list(self.callstack)
        doc["src_proc"] = self.src_proc
        doc["dst_proc"] = self.dst_proc
        doc["src_endpoint_kind"] = self.src_endpoint_kind
        doc["dst_endpoint_kind"] = self.dst_endpoint_kind
        if self.src_gpu is not None:
            doc["src_gpu"] = self.src_gpu
        if self.dst_gpu is not None:
            doc["dst_gpu"] = self.dst_gpu
        if self.src_nic is not None:
            doc["src_nic"] = self.src_nic
        if self.dst_nic is not None:
            doc["dst_nic"] = self.dst_nic
        if self.mpi_fn is not None:
            doc["mpi_fn"] = self.mpi_fn
        if self.ucp_link is not None:
            doc["ucp_link"] = self.ucp_link.to_doc()
        doc["transport"] = self.transport
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "CuratedComm":
        link = doc.get("ucp_link")
        return cls(
            proc=doc["proc"],
            seq=doc["seq"],
            family=doc["family"],
            mode=doc["mode"],
            ep_id=doc["ep_id"],
            length=doc["length"],
            local_buf=doc.get("local_buf"),
            remote_buf=doc.get("remote_buf"),
            am_id=doc.get("am_id"),
            completion_slot=doc.get("completion_slot"),
            t_start=doc["t_start"],
            t_complete=doc.get("t_complete"),
            callstack=tuple(doc["callstack"]),
            src_proc=doc["src_proc"],
            dst_proc=doc["dst_proc"],
            src_endpoint_kind=doc["src_endpoint_kind"],
            dst_endpoint_kind=doc["dst_endpoint_kind"],
            src_gpu=doc.get("src_gpu"),
            dst_gpu=doc.get("dst_gpu"),
            src_nic=doc.get("src_nic"),
            dst_nic=doc.get("dst_nic"),
            mpi_fn=doc.get("mpi_fn"),
            ucp_link=None
            if link is None
            else UcpLink(link["send"][0], link["send"][1], link["recv"][0], link["recv"][1]),
            transport=doc["transport"],
        )


@dataclass(frozen=True)
class UcpPairRec:
    send_proc: str
    send: UcpOp
    recv_proc: str
    recv: UcpOp


def _ucp_to_doc(op: UcpOp) -> dict:
    doc: dict[str, Any] = {
        "seq": op.seq,
        "dir": op.dir,
        "tag": op.tag,
        "buffer": op.buffer,
        "length": op.length,
    }
    if op.ucp_ep_id is not None:
        doc["ucp_ep_id"] = op.ucp_ep_id
    if op.managed_uct_eps is not None:
        doc["managed_uct_eps"] = list(op.managed_uct_eps)
    if op.peer_proc_id is not None:
        doc["peer_proc_id"] = op.peer_proc_id
    doc["t_start"] = op.t_start
    doc["t_end"] = op.t_end
    doc["callstack"] = list(op.callstack)
    return doc


def _ucp_from_doc(doc: dict) -> UcpOp:
    managed = doc.get("managed_uct_eps")
    return UcpOp(
        seq=doc["seq"],
        dir=doc["dir"],
        tag=doc["tag"],
        buffer=doc["buffer"],
        length=doc["length"],
        ucp_ep_id=doc.get("ucp_ep_id"),
        managed_uct_eps=None if managed is None else tuple(managed),
        peer_proc_id=doc.get("peer_proc_id"),
        t_start=doc["t_start"],
        t_end=doc["t_end"],
        callstack=tuple(doc["callstack"]),
    )


@dataclass
class CuratedTrace:
    topology: ClusterTopology | None = None
    processes: list[ProcessMeta] = field(default_factory=list)
    comms: list[CuratedComm] = field(default_factory=list)
    ucp_pairs: list[UcpPairRec] = field(default_factory=list)

    def proc_node(self, proc_uid: str) -> str:
        for p in self.processes:
            if p.proc_uid == proc_uid:
                return p.node
        raise LookupError(f"unknown process {proc_uid!r}")


def write_curated(trace: CuratedTrace) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "topology": None if trace.topology is None else trace.topology.to_doc(),
        "processes": [
            {"proc_uid": p.proc_uid, "rank": p.rank, "node": p.node, "pid": p.pid}
            for p in trace.processes
        ],
        "comms": [c.to_doc() for c in trace.comms],
        "ucp_pairs": [
            {
                "send_proc": pr.send_proc,
                "send": _ucp_to_doc(pr.send),
                "recv_proc": pr.recv_proc,
                "recv": _ucp_to_doc(pr.recv),
            }
            for pr in trace.ucp_pairs
        ],
    }
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def read_curated(data: bytes | str, file: str = "<stream>") -> CuratedTrace:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg}", file=file) from None
    if not isinstance(doc, dict):
        raise MalformedRecord("curated trace must be a JSON object", file=file)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionMismatch(version, SCHEMA_VERSION, file=file)
    try:
        topo = doc["topology"]
        return CuratedTrace(
            topology=None if topo is None else ClusterTopology.from_doc(topo),
            processes=[
                ProcessMeta(p["proc_uid"], p["rank"], p["node"], p["pid"])
                for p in doc["processes"]
            ],
            comms=[CuratedComm.from_doc(c) for c in doc["comms"]],
            ucp_pairs=[
                UcpPairRec(
                    send_proc=pr["send_proc"],
                    send=_ucp_from_doc(pr["send"]),
                    recv_proc=pr["recv_proc"],
                    recv=_ucp_from_doc(pr["recv"]),
                )
                for pr in doc["ucp_pairs"]
            ],
        )
    except (KeyError, TypeError, IndexError, InvariantViolation) as exc:
        raise MalformedRecord(f"bad curated document: {exc}", file=file) from None
