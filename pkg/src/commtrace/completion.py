"""Proxy-completion pool: fixed slots wrapping user completion callbacks.

Non-blocking transport operations hand the stack a completion handle holding
a counter and a callback; the callback must run exactly once, when the
counter reaches zero. To time each split operation individually, every
operation gets its own proxy slot; the slot records the per-operation
completion time, decrements the shared group counter, and reports whether
this decrement is the one that fires the original callback.

A slot returns to the free pool only after both events have happened: its
completion was delivered *and* the trace recorder released it. The two can
occur in either order.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field

from .errors import DoubleComplete, PoolExhausted, RegistryError, SlotNotArmed

DEFAULT_POOL_SIZE = 128


@dataclass
class CompletionGroup:
    group_id: int
    count: int
    callback_token: object
    fired: bool = False

    def __post_init__(self):
        if self.count <= 0:
            raise RegistryError("completion group count must be > 0")


@dataclass
class ProxySlot:
    slot_id: int
    state: str = "free"  # free | armed | completed
    group: CompletionGroup | None = None
    t_complete: int | None = None
    status: int | None = None
    recorded: bool = False


@dataclass(frozen=True)
class FireDecision:
    fired_original: bool
    group_id: int
    callback_token: object


@dataclass
class RegistryConfig:
    pool_size: int = DEFAULT_POOL_SIZE

    def __post_init__(self):
        if self.pool_size < 1:
            raise RegistryError("pool_size must be >= 1")


class CompletionRegistry:
    """Pool of proxy completion slots with exactly-once callback semantics.

    Thread-safe: the counter decrement and the zero check happen under one
    lock, so the original callback is reported fired exactly once under any
    interleaving of completions.
    """

    def __init__(self, config: RegistryConfig | int = DEFAULT_POOL_SIZE):
        if isinstance(config, int):
            config = RegistryConfig(config)
        self.config = config
        self._slots = {i: ProxySlot(i) for i in range(1, config.pool_size + 1)}
        self._free: list[int] = list(range(1, config.pool_size + 1))
        heapq.heapify(self._free)
        self._original: dict[int, object] = {}  # callback token, indexed by slot id
        self._lock = threading.Lock()
        self._next_group_id = 1

    def make_group(self, count: int, callback_token: object) -> CompletionGroup:
        with self._lock:
            gid = self._next_group_id
            self._next_group_id += 1
        return CompletionGroup(group_id=gid, count=count, callback_token=callback_token)

    def acquire(self, group: CompletionGroup) -> int:
        """Arm the lowest-numbered free slot and bind it to `group`."""
        with self._lock:
            if group.fired:
                raise RegistryError(f"group {group.group_id} already fired")
            if not self._free:
                raise PoolExhausted(
                    f"all {self.config.pool_size} completion slots are in flight"
                )
            slot_id = heapq.heappop(self._free)
            slot = self._slots[slot_id]
            slot.state = "armed"
            slot.group = group
            slot.t_complete = None
            slot.status = None
            slot.recorded = False
            self._original[slot_id] = group.callback_token
            return slot_id

    def on_complete(self, slot_id: int, status: int, t: int) -> FireDecision:
        """Deliver a completion to an armed slot.

        Records the per-operation completion time and status, decrements the
        group counter, and fires the original callback iff the counter
        reached zero on this call. A failure status is recorded but still
        decrements the counter.
        """
        with self._lock:
            slot = self._slot(slot_id)
            if slot.state == "free":
                raise SlotNotArmed(f"slot {slot_id} is not armed")
            if slot.state == "completed":
                raise DoubleComplete(f"slot {slot_id} already completed")
            group = slot.group
            assert group is not None
            slot.t_complete = t
            slot.status = status
            group.count -= 1
            fired = group.count == 0
            if fired:
                group.fired = True
            decision = FireDecision(
                fired_original=fired,
                group_id=group.group_id,
                callback_token=self._original[slot_id],
            )
            if slot.recorded:
                self._release_locked(slot)
            else:
                slot.state = "completed"
            return decision

    def release(self, slot_id: int) -> None:
        """Recorder-side release; frees the slot once its completion arrived."""
        with self._lock:
            slot = self._slot(slot_id)
            if slot.state == "free":
                raise SlotNotArmed(f"slot {slot_id} is not in use")
            if slot.state == "completed":
                self._release_locked(slot)
            else:
                slot.recorded = True  # completion still pending; free on arrival

    def pending(self) -> list[tuple[int, int]]:
        """Snapshot of armed slots, for leak detection at shutdown."""
        with self._lock:
            return [
                (s.slot_id, s.group.group_id)
                for s in self._slots.values()
                if s.state == "armed" and s.group is not None
            ]

    def slot(self, slot_id: int) -> ProxySlot:
        with self._lock:
            return self._slot(slot_id)

    def _slot(self, slot_id: int) -> ProxySlot:
        try:
            return self._slots[slot_id]
        except KeyError:
            raise RegistryError(f"slot id {slot_id} outside pool") from None

    def _release_locked(self, slot: ProxySlot) -> None:
        slot.state = "free"
        slot.group = None
        slot.recorded = False
        self._original.pop(slot.slot_id, None)
        heapq.heappush(self._free, slot.slot_id)
