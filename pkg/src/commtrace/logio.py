"""Bit-exact parsing and serialization of per-process log files.

Wire format: newline-delimited JSON, one self-describing record per line with
a ``kind`` discriminator (``meta|iface|ep|conn|uct|ucp`` in comm logs,
``alloc|free`` in allocation logs). Serialization is canonical: fixed field
order per kind, absent optionals omitted entirely, addresses as lowercase
hex. Identical records therefore always produce identical bytes, and
``parse(write(records)) == records``.
"""

from __future__ import annotations

import json
from typing import Any, BinaryIO, Iterable

from .errors import (
    DanglingReference,
    DuplicateMeta,
    FreeWithoutAlloc,
    InvariantViolation,
    MalformedRecord,
    MissingMeta,
)
from .records import (
    AllocEvent,
    CommRecord,
    ConnectionRecord,
    EndpointRecord,
    InterfaceRecord,
    ProcessLog,
    ProcessMeta,
    UcpOp,
    UctOp,
)

_HEX_DIGITS = set("0123456789abcdef")


def _encode_line(fields: list[tuple[str, Any]]) -> str:
    return json.dumps({k: v for k, v in fields if v is not None}, separators=(",", ":"))


def _addr_hex(blob: bytes | None) -> str | None:
    return None if blob is None else blob.hex()


def record_to_line(rec: CommRecord) -> str:
    """Canonical single-line serialization of one comm-log record."""
    if isinstance(rec, ProcessMeta):
        return _encode_line(
            [
                ("kind", "meta"),
                ("proc_uid", rec.proc_uid),
                ("rank", rec.rank),
                ("node", rec.node),
                ("pid", rec.pid),
            ]
        )
    if isinstance(rec, InterfaceRecord):
        return _encode_line(
            [
                ("kind", "iface"),
                ("iface_id", rec.iface_id),
                ("transport", rec.transport),
                ("memory_domain", rec.memory_domain),
                ("net_device", rec.net_device),
                ("iface_addr", _addr_hex(rec.iface_addr)),
                ("t_create", rec.t_create),
            ]
        )
    if isinstance(rec, EndpointRecord):
        return _encode_line(
            [
                ("kind", "ep"),
                ("ep_id", rec.ep_id),
                ("iface_id", rec.iface_id),
                ("ep_addr", _addr_hex(rec.ep_addr)),
                ("t_create", rec.t_create),
            ]
        )
    if isinstance(rec, ConnectionRecord):
        return _encode_line(
            [
                ("kind", "conn"),
                ("ep_id", rec.ep_id),
                ("remote_addr", rec.remote_addr.hex()),
                ("remote_kind_hint", rec.remote_kind_hint),
                ("t_connect", rec.t_connect),
            ]
        )
    if isinstance(rec, UctOp):
        return _encode_line(
            [
                ("kind", "uct"),
                ("seq", rec.seq),
                ("family", rec.family),
                ("mode", rec.mode),
                ("ep_id", rec.ep_id),
                ("length", rec.length),
                ("local_buf", rec.local_buf),
                ("remote_buf", rec.remote_buf),
                ("am_id", rec.am_id),
                ("completion_slot", rec.completion_slot),
                ("t_start", rec.t_start),
                ("t_complete", rec.t_complete),
                ("callstack", list(rec.callstack)),
            ]
        )
    if isinstance(rec, UcpOp):
        return _encode_line(
            [
                ("kind", "ucp"),
                ("seq", rec.seq),
                ("dir", rec.dir),
                ("tag", rec.tag),
                ("buffer", rec.buffer),
                ("length", rec.length),
                ("ucp_ep_id", rec.ucp_ep_id),
                (
                    "managed_uct_eps",
                    None if rec.managed_uct_eps is None else list(rec.managed_uct_eps),
                ),
                ("peer_proc_id", rec.peer_proc_id),
                ("t_start", rec.t_start),
                ("t_end", rec.t_end),
                ("callstack", list(rec.callstack)),
            ]
        )
    raise InvariantViolation(f"unknown record type {type(rec).__name__}")


def alloc_event_to_line(ev: AllocEvent) -> str:
    if ev.kind == "alloc":
        return _encode_line(
            [
                ("kind", "alloc"),
                ("device_index", ev.device_index),
                ("base", ev.base),
                ("length", ev.length),
                ("t", ev.t),
            ]
        )
    return _encode_line([("kind", "free"), ("base", ev.base), ("t", ev.t)])


# ---------------------------------------------------------------------------
# field extraction helpers for the strict parser

class _Fields:
    """One parsed JSON object, consumed field by field.

    Every field must be taken exactly once; leftovers or wrong types fail the
    line. This keeps the accepted grammar tight enough that fuzzed mutations
    are either harmless or rejected with a line number.
    """

    def __init__(self, obj: dict, file: str, line: int):
        self.obj = dict(obj)
        self.file = file
        self.line = line

    def fail(self, message: str):
        raise MalformedRecord(message, file=self.file, line=self.line)

    def _take(self, name: str, required: bool):
        if name not in self.obj:
            if required:
                self.fail(f"missing field {name!r}")
            return None
        value = self.obj.pop(name)
        if value is None:
            self.fail(f"field {name!r} is null (omit it instead)")
        return value

    def int_(self, name: str, required: bool = True) -> int | None:
        v = self._take(name, required)
        if v is None:
            return None
        if not isinstance(v, int) or isinstance(v, bool):
            self.fail(f"field {name!r} must be an integer")
        return v

    def str_(self, name: str, required: bool = True) -> str | None:
        v = self._take(name, required)
        if v is None:
            return None
        if not isinstance(v, str):
            self.fail(f"field {name!r} must be a string")
        return v

    def addr(self, name: str, required: bool = True) -> bytes | None:
        s = self.str_(name, required)
        if s is None:
            return None
        if not s or len(s) % 2 or len(s) > 128 or not set(s) <= _HEX_DIGITS:
            self.fail(f"field {name!r} must be lowercase hex of 1-64 bytes")
        return bytes.fromhex(s)

    def str_list(self, name: str) -> list[str]:
        v = self._take(name, required=True)
        if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
            self.fail(f"field {name!r} must be a list of strings")
        return v

    def int_list(self, name: str, required: bool = True) -> list[int] | None:
        v = self._take(name, required)
        if v is None:
            return None
        if not isinstance(v, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in v
        ):
            self.fail(f"field {name!r} must be a list of integers")
        return v

    def done(self):
        if self.obj:
            self.fail(f"unknown fields: {sorted(self.obj)}")


def _iter_lines(data: bytes | str | BinaryIO, file: str):
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, str):
        data = data.encode("utf-8")
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    for i, raw in enumerate(lines, start=1):
        yield i, raw


def _decode_obj(raw: bytes, file: str, line: int) -> dict:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedRecord("invalid UTF-8", file=file, line=line) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg}", file=file, line=line) from None
    if not isinstance(obj, dict):
        raise MalformedRecord("record must be a JSON object", file=file, line=line)
    return obj


def parse_comm_log(data: bytes | str | BinaryIO, file: str = "<stream>") -> ProcessLog:
    """Parse one process's communication log.

    Returns records in file order after verifying all referential invariants:
    exactly one meta record, endpoint interfaces and op endpoints declared
    earlier in the same log, connection times no earlier than their
    endpoint's creation, and strictly increasing per-family seq values.
    """
    log = ProcessLog()
    meta_seen = False
    ifaces: dict[int, InterfaceRecord] = {}
    eps: dict[int, EndpointRecord] = {}
    last_uct_seq = -1
    last_ucp_seq = -1

    for line, raw in _iter_lines(data, file):
        obj = _decode_obj(raw, file, line)
        f = _Fields(obj, file, line)
        kind = f.str_("kind")
        try:
            if kind == "meta":
                if meta_seen:
                    raise DuplicateMeta(file=file, line=line)
                meta_seen = True
                rec: CommRecord = ProcessMeta(
                    proc_uid=f.str_("proc_uid"),
                    rank=f.int_("rank"),
                    node=f.str_("node"),
                    pid=f.int_("pid"),
                )
            elif kind == "iface":
                rec = InterfaceRecord(
                    iface_id=f.int_("iface_id"),
                    transport=f.str_("transport"),
                    memory_domain=f.str_("memory_domain"),
                    net_device=f.str_("net_device", required=False),
                    iface_addr=f.addr("iface_addr", required=False),
                    t_create=f.int_("t_create"),
                )
                if rec.iface_id in ifaces:
                    f.fail(f"duplicate iface_id {rec.iface_id}")
                ifaces[rec.iface_id] = rec
            elif kind == "ep":
                rec = EndpointRecord(
                    ep_id=f.int_("ep_id"),
                    iface_id=f.int_("iface_id"),
                    ep_addr=f.addr("ep_addr", required=False),
                    t_create=f.int_("t_create"),
                )
                if rec.ep_id in eps:
                    f.fail(f"duplicate ep_id {rec.ep_id}")
                if rec.iface_id not in ifaces:
                    raise DanglingReference("iface", rec.iface_id, file=file, line=line)
                eps[rec.ep_id] = rec
            elif kind == "conn":
                rec = ConnectionRecord(
                    ep_id=f.int_("ep_id"),
                    remote_addr=f.addr("remote_addr"),
                    remote_kind_hint=f.str_("remote_kind_hint", required=False),
                    t_connect=f.int_("t_connect"),
                )
                if rec.ep_id not in eps:
                    raise DanglingReference("ep", rec.ep_id, file=file, line=line)
                if rec.t_connect < eps[rec.ep_id].t_create:
                    f.fail("t_connect earlier than endpoint creation")
            elif kind == "uct":
                rec = UctOp(
                    seq=f.int_("seq"),
                    family=f.str_("family"),
                    mode=f.str_("mode"),
                    ep_id=f.int_("ep_id"),
                    length=f.int_("length"),
                    local_buf=f.int_("local_buf", required=False),
                    remote_buf=f.int_("remote_buf", required=False),
                    am_id=f.int_("am_id", required=False),
                    completion_slot=f.int_("completion_slot", required=False),
                    t_start=f.int_("t_start"),
                    t_complete=f.int_("t_complete", required=False),
                    callstack=tuple(f.str_list("callstack")),
                )
                if rec.ep_id not in eps:
                    raise DanglingReference("ep", rec.ep_id, file=file, line=line)
                if rec.seq <= last_uct_seq:
                    f.fail(f"uct seq {rec.seq} not increasing")
                last_uct_seq = rec.seq
            elif kind == "ucp":
                managed = f.int_list("managed_uct_eps", required=False)
                rec = UcpOp(
                    seq=f.int_("seq"),
                    dir=f.str_("dir"),
                    tag=f.int_("tag"),
                    buffer=f.int_("buffer"),
                    length=f.int_("length"),
                    ucp_ep_id=f.int_("ucp_ep_id", required=False),
                    managed_uct_eps=None if managed is None else tuple(managed),
                    peer_proc_id=f.str_("peer_proc_id", required=False),
                    t_start=f.int_("t_start"),
                    t_end=f.int_("t_end"),
                    callstack=tuple(f.str_list("callstack")),
                )
                if rec.seq <= last_ucp_seq:
                    f.fail(f"ucp seq {rec.seq} not increasing")
                last_ucp_seq = rec.seq
            else:
                f.fail(f"unknown record kind {kind!r}")
        except InvariantViolation as exc:
            raise MalformedRecord(str(exc), file=file, line=line) from None
        f.done()
        log.records.append(rec)

    if not meta_seen:
        raise MissingMeta(file=file)
    return log


def write_comm_log(log: ProcessLog | Iterable[CommRecord]) -> bytes:
    """Serialize records in input order; canonical bytes for identical input.

    Re-checks the cross-record invariants the parser enforces and raises
    InvariantViolation rather than emitting an unparseable file.
    """
    records = log.records if isinstance(log, ProcessLog) else list(log)
    meta_count = sum(1 for r in records if isinstance(r, ProcessMeta))
    if meta_count != 1:
        raise InvariantViolation(f"log must contain exactly one meta record, found {meta_count}")
    ifaces: set[int] = set()
    eps: dict[int, int] = {}
    last_seq = {"uct": -1, "ucp": -1}
    out: list[str] = []
    for rec in records:
        if isinstance(rec, InterfaceRecord):
            if rec.iface_id in ifaces:
                raise InvariantViolation(f"duplicate iface_id {rec.iface_id}")
            ifaces.add(rec.iface_id)
        elif isinstance(rec, EndpointRecord):
            if rec.ep_id in eps:
                raise InvariantViolation(f"duplicate ep_id {rec.ep_id}")
            if rec.iface_id not in ifaces:
                raise InvariantViolation(f"endpoint references unknown iface {rec.iface_id}")
            eps[rec.ep_id] = rec.t_create
        elif isinstance(rec, ConnectionRecord):
            if rec.ep_id not in eps:
                raise InvariantViolation(f"connection references unknown ep {rec.ep_id}")
            if rec.t_connect < eps[rec.ep_id]:
                raise InvariantViolation("t_connect earlier than endpoint creation")
        elif isinstance(rec, UctOp):
            if rec.ep_id not in eps:
                raise InvariantViolation(f"uct op references unknown ep {rec.ep_id}")
            if rec.seq <= last_seq["uct"]:
                raise InvariantViolation(f"uct seq {rec.seq} not increasing")
            last_seq["uct"] = rec.seq
        elif isinstance(rec, UcpOp):
            if rec.seq <= last_seq["ucp"]:
                raise InvariantViolation(f"ucp seq {rec.seq} not increasing")
            last_seq["ucp"] = rec.seq
        out.append(record_to_line(rec))
    return ("\n".join(out) + "\n").encode("utf-8") if out else b""


def parse_alloc_log(data: bytes | str | BinaryIO, file: str = "<stream>") -> list[AllocEvent]:
    """Parse a device-memory allocation log; free-before-alloc is rejected.

    A free closes the most recent open interval at its base, so reusing a
    virtual address after a free is legal.
    """
    events: list[AllocEvent] = []
    live: set[int] = set()
    for line, raw in _iter_lines(data, file):
        obj = _decode_obj(raw, file, line)
        f = _Fields(obj, file, line)
        kind = f.str_("kind")
        try:
            if kind == "alloc":
                ev = AllocEvent(
                    kind="alloc",
                    device_index=f.int_("device_index"),
                    base=f.int_("base"),
                    length=f.int_("length"),
                    t=f.int_("t"),
                )
                live.add(ev.base)
            elif kind == "free":
                ev = AllocEvent(kind="free", base=f.int_("base"), t=f.int_("t"))
                if ev.base not in live:
                    raise FreeWithoutAlloc(ev.base, file=file, line=line)
                live.discard(ev.base)
            else:
                f.fail(f"unknown record kind {kind!r}")
        except InvariantViolation as exc:
            raise MalformedRecord(str(exc), file=file, line=line) from None
        f.done()
        events.append(ev)
    return events


def write_alloc_log(events: Iterable[AllocEvent]) -> bytes:
    events = list(events)
    live: set[int] = set()
    for ev in events:
        if ev.kind == "alloc":
            live.add(ev.base)
        elif ev.base not in live:
            raise InvariantViolation(f"free of never-allocated base 0x{ev.base:x}")
        else:
            live.discard(ev.base)
    return ("\n".join(alloc_event_to_line(e) for e in events) + "\n").encode() if events else b""
