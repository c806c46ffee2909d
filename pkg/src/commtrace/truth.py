"""Ground-truth records emitted by the simulator alongside the logs.

They describe, for every transport op and every ucp op, the attribution a
correct correlator must recover: process pair, device tags, NIC names, the
owning ucp pair and the MPI function. Versioned like the curated format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import MalformedRecord, VersionMismatch

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GtUct:
    proc: str
    seq: int
    src_proc: str
    dst_proc: str
    src_kind: str
    dst_kind: str
    src_gpu: int | None
    dst_gpu: int | None
    src_nic: str | None
    dst_nic: str | None
    ucp_send: tuple[str, int] | None
    ucp_recv: tuple[str, int] | None
    mpi_fn: str | None
    pattern: str
    role: str  # header | data | stage_d2h | stage_h2d
    message: int  # logical message index


@dataclass(frozen=True)
class GtUcp:
    proc: str
    seq: int
    peer_proc: str
    match: tuple[str, int] | None


@dataclass(frozen=True)
class GtMessage:
    index: int
    src_rank: int
    dst_rank: int
    bytes: int
    mpi_fn: str
    tag: int
    pattern: str
    data_hops: int


@dataclass
class GroundTruth:
    uct: list[GtUct] = field(default_factory=list)
    ucp: list[GtUcp] = field(default_factory=list)
    messages: list[GtMessage] = field(default_factory=list)

    def uct_by_op(self) -> dict[tuple[str, int], GtUct]:
        return {(g.proc, g.seq): g for g in self.uct}

    def ucp_by_op(self) -> dict[tuple[str, int], GtUcp]:
        return {(g.proc, g.seq): g for g in self.ucp}


def _pair(value) -> tuple[str, int] | None:
    return None if value is None else (value[0], value[1])


def write_ground_truth(gt: GroundTruth) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "uct": [
            {
                "proc": g.proc,
                "seq": g.seq,
                "src_proc": g.src_proc,
                "dst_proc": g.dst_proc,
                "src_kind": g.src_kind,
                "dst_kind": g.dst_kind,
                "src_gpu": g.src_gpu,
                "dst_gpu": g.dst_gpu,
                "src_nic": g.src_nic,
                "dst_nic": g.dst_nic,
                "ucp_send": None if g.ucp_send is None else list(g.ucp_send),
                "ucp_recv": None if g.ucp_recv is None else list(g.ucp_recv),
                "mpi_fn": g.mpi_fn,
                "pattern": g.pattern,
                "role": g.role,
                "message": g.message,
            }
            for g in gt.uct
        ],
        "ucp": [
            {
                "proc": g.proc,
                "seq": g.seq,
                "peer_proc": g.peer_proc,
                "match": None if g.match is None else list(g.match),
            }
            for g in gt.ucp
        ],
        "messages": [
            {
                "index": m.index,
                "src_rank": m.src_rank,
                "dst_rank": m.dst_rank,
                "bytes": m.bytes,
                "mpi_fn": m.mpi_fn,
                "tag": m.tag,
                "pattern": m.pattern,
                "data_hops": m.data_hops,
            }
            for m in gt.messages
        ],
    }
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def read_ground_truth(data: bytes | str, file: str = "<stream>") -> GroundTruth:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg}", file=file) from None
    version = doc.get("schema_version") if isinstance(doc, dict) else None
    if version != SCHEMA_VERSION:
        raise VersionMismatch(version, SCHEMA_VERSION, file=file)
    try:
        return GroundTruth(
            uct=[
                GtUct(
                    proc=g["proc"],
                    seq=g["seq"],
                    src_proc=g["src_proc"],
                    dst_proc=g["dst_proc"],
                    src_kind=g["src_kind"],
                    dst_kind=g["dst_kind"],
                    src_gpu=g["src_gpu"],
                    dst_gpu=g["dst_gpu"],
                    src_nic=g["src_nic"],
                    dst_nic=g["dst_nic"],
                    ucp_send=_pair(g["ucp_send"]),
                    ucp_recv=_pair(g["ucp_recv"]),
                    mpi_fn=g["mpi_fn"],
                    pattern=g["pattern"],
                    role=g["role"],
                    message=g["message"],
                )
                for g in doc["uct"]
            ],
            ucp=[
                GtUcp(proc=g["proc"], seq=g["seq"], peer_proc=g["peer_proc"], match=_pair(g["match"]))
                for g in doc["ucp"]
            ],
            messages=[
                GtMessage(
                    index=m["index"],
                    src_rank=m["src_rank"],
                    dst_rank=m["dst_rank"],
                    bytes=m["bytes"],
                    mpi_fn=m["mpi_fn"],
                    tag=m["tag"],
                    pattern=m["pattern"],
                    data_hops=m["data_hops"],
                )
                for m in doc["messages"]
            ],
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedRecord(f"bad ground-truth document: {exc}", file=file) from None
