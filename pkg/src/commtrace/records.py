"""Record types for per-process communication and allocation logs.

Every record is an immutable dataclass validated on construction. Address
blobs are plain ``bytes`` (1-64 bytes, byte-wise equality); they render as
lowercase hex on the wire. Timestamps are unsigned nanoseconds relative to
the trace epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvariantViolation

TRANSPORTS = frozenset(
    {"rc_mlx5", "dc_mlx5", "sysv", "cuda_ipc", "cuda_copy", "gdr_copy", "self", "tcp"}
)
NIC_TRANSPORTS = frozenset({"rc_mlx5", "dc_mlx5"})
UCT_FAMILIES = frozenset({"am", "put", "get"})
UCT_MODES = frozenset({"short", "bcopy", "zcopy"})
REMOTE_KIND_HINTS = frozenset({"ep", "iface", "device"})
ENDPOINT_KINDS = frozenset({"host", "gpu"})

MAX_ADDR_LEN = 64
MAX_TAG = (1 << 64) - 1


def check_addr(blob: bytes, what: str) -> None:
    if not isinstance(blob, bytes):
        raise InvariantViolation(f"{what} must be bytes, got {type(blob).__name__}")
    if not 1 <= len(blob) <= MAX_ADDR_LEN:
        raise InvariantViolation(f"{what} must be 1-{MAX_ADDR_LEN} bytes, got {len(blob)}")


def _check_time(value: int, what: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InvariantViolation(f"{what} must be an unsigned integer, got {value!r}")


def _check_nonneg(value: int, what: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InvariantViolation(f"{what} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class ProcessMeta:
    proc_uid: str
    rank: int
    node: str
    pid: int

    def __post_init__(self):
        if not self.proc_uid:
            raise InvariantViolation("proc_uid must be non-empty")
        _check_nonneg(self.rank, "rank")


@dataclass(frozen=True)
class InterfaceRecord:
    iface_id: int
    transport: str
    memory_domain: str
    net_device: str | None
    iface_addr: bytes | None
    t_create: int

    def __post_init__(self):
        if self.transport not in TRANSPORTS:
            raise InvariantViolation(f"unknown transport {self.transport!r}")
        if self.transport in NIC_TRANSPORTS and not self.net_device:
            raise InvariantViolation(f"{self.transport} interface must carry net_device")
        if self.iface_addr is not None:
            check_addr(self.iface_addr, "iface_addr")
        _check_time(self.t_create, "t_create")


@dataclass(frozen=True)
class EndpointRecord:
    ep_id: int
    iface_id: int
    ep_addr: bytes | None
    t_create: int

    def __post_init__(self):
        if self.ep_addr is not None:
            check_addr(self.ep_addr, "ep_addr")
        _check_time(self.t_create, "t_create")


@dataclass(frozen=True)
class ConnectionRecord:
    ep_id: int
    remote_addr: bytes
    remote_kind_hint: str | None
    t_connect: int

    def __post_init__(self):
        check_addr(self.remote_addr, "remote_addr")
        if self.remote_kind_hint is not None and self.remote_kind_hint not in REMOTE_KIND_HINTS:
            raise InvariantViolation(f"unknown remote_kind_hint {self.remote_kind_hint!r}")
        _check_time(self.t_connect, "t_connect")


@dataclass(frozen=True)
class UctOp:
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

    def __post_init__(self):
        if self.family not in UCT_FAMILIES:
            raise InvariantViolation(f"unknown uct family {self.family!r}")
        if self.mode not in UCT_MODES:
            raise InvariantViolation(f"unknown uct mode {self.mode!r}")
        _check_nonneg(self.seq, "seq")
        _check_nonneg(self.length, "length")
        if (self.am_id is not None) != (self.family == "am"):
            raise InvariantViolation("am_id present iff family=am")
        if (self.completion_slot is not None) != (self.mode == "zcopy"):
            raise InvariantViolation("completion_slot present iff mode=zcopy")
        if self.family in ("put", "get") and self.mode in ("short", "zcopy"):
            if self.local_buf is None or self.remote_buf is None:
                raise InvariantViolation(f"{self.family}_{self.mode} requires both buffers")
        _check_time(self.t_start, "t_start")
        if self.t_complete is not None:
            _check_time(self.t_complete, "t_complete")
            if self.t_complete < self.t_start:
                raise InvariantViolation("t_complete < t_start")
        object.__setattr__(self, "callstack", tuple(self.callstack))

    @property
    def uct_fn(self) -> str:
        return f"{self.family}_{self.mode}"


@dataclass(frozen=True)
class UcpOp:
    seq: int
    dir: str
    tag: int
    buffer: int
    length: int
    ucp_ep_id: int | None
    managed_uct_eps: tuple[int, ...] | None
    peer_proc_id: str | None
    t_start: int
    t_end: int
    callstack: tuple[str, ...]

    def __post_init__(self):
        if self.dir not in ("send", "recv"):
            raise InvariantViolation(f"unknown ucp dir {self.dir!r}")
        _check_nonneg(self.seq, "seq")
        _check_nonneg(self.length, "length")
        if not 0 <= self.tag <= MAX_TAG:
            raise InvariantViolation(f"tag out of 64-bit range: {self.tag!r}")
        if self.dir == "send" and self.ucp_ep_id is None:
            raise InvariantViolation("send requires ucp_ep_id")
        if self.dir == "recv" and (self.ucp_ep_id is not None or self.managed_uct_eps is not None):
            raise InvariantViolation("recv must not carry ucp_ep_id / managed_uct_eps")
        _check_time(self.t_start, "t_start")
        _check_time(self.t_end, "t_end")
        if self.t_end < self.t_start:
            raise InvariantViolation("t_end < t_start")
        if self.managed_uct_eps is not None:
            object.__setattr__(self, "managed_uct_eps", tuple(self.managed_uct_eps))
        object.__setattr__(self, "callstack", tuple(self.callstack))


@dataclass(frozen=True)
class AllocEvent:
    kind: str
    base: int
    t: int
    device_index: int | None = None
    length: int | None = None

    def __post_init__(self):
        if self.kind not in ("alloc", "free"):
            raise InvariantViolation(f"unknown alloc event kind {self.kind!r}")
        _check_nonneg(self.base, "base")
        _check_time(self.t, "t")
        if self.kind == "alloc":
            if self.device_index is None or self.length is None:
                raise InvariantViolation("alloc requires device_index and length")
            _check_nonneg(self.device_index, "device_index")
            if self.length <= 0:
                raise InvariantViolation("alloc length must be > 0")
        else:
            if self.device_index is not None or self.length is not None:
                raise InvariantViolation("free carries only base and t")


# Records as they appear in a comm log, in file order. The meta record is kept
# in line with the rest so that re-serialization is byte-identical.
CommRecord = ProcessMeta | InterfaceRecord | EndpointRecord | ConnectionRecord | UctOp | UcpOp


@dataclass
class ProcessLog:
    """One process's parsed communication log, in original file order."""

    records: list[CommRecord] = field(default_factory=list)

    @property
    def meta(self) -> ProcessMeta:
        for r in self.records:
            if isinstance(r, ProcessMeta):
                return r
        raise LookupError("log has no meta record")

    def _of(self, cls):
        return [r for r in self.records if isinstance(r, cls)]

    @property
    def ifaces(self) -> list[InterfaceRecord]:
        return self._of(InterfaceRecord)

    @property
    def endpoints(self) -> list[EndpointRecord]:
        return self._of(EndpointRecord)

    @property
    def connections(self) -> list[ConnectionRecord]:
        return self._of(ConnectionRecord)

    @property
    def uct_ops(self) -> list[UctOp]:
        return self._of(UctOp)

    @property
    def ucp_ops(self) -> list[UcpOp]:
        return self._of(UcpOp)
