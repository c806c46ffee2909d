"""Expansion of workload descriptions into logical point-to-point messages.

Collectives are lowered to their point-to-point schedules: recursive doubling
pairs index i with i xor 2^k per round; ring circulates chunks to (i+1) mod P
over 2(P-1) steps; reduce-scatter-allgather runs a recursive-halving exchange
followed by its allgather mirror. The node_leader style routes every
inter-node leg through each node's lowest rank.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ScenarioError, UnsupportedSize
from .topology import ClusterTopology, WorkloadSpec

TAG_WINDOW_MASK = 0xFFFF


@dataclass(frozen=True)
class LogicalMessage:
    src_rank: int
    dst_rank: int
    bytes: int
    mpi_fn: str
    tag: int
    buffer_kind: str


class TagAllocator:
    """Tags unique per ordered peer pair: (src << 32) | (dst << 16) | counter."""

    def __init__(self):
        self._window: dict[tuple[int, int], int] = {}

    def next(self, src: int, dst: int) -> int:
        w = self._window.get((src, dst), 0)
        if w > TAG_WINDOW_MASK:
            raise ScenarioError(f"tag window exhausted for pair {src}->{dst}")
        self._window[(src, dst)] = w + 1
        return (src << 32) | (dst << 16) | w


def _require_power_of_two(n: int, what: str) -> int:
    if n < 2 or n & (n - 1):
        raise UnsupportedSize(f"{what} requires a power-of-two participant count, got {n}")
    return n.bit_length() - 1


def _allreduce_rounds(alg: str, participants: list[int], msg_size: int):
    """Yield (src, dst, bytes) legs of one allreduce iteration over `participants`."""
    p = len(participants)
    if alg == "recursive_doubling":
        log_p = _require_power_of_two(p, "recursive doubling")
        for k in range(log_p):
            for i in range(p):
                yield participants[i], participants[i ^ (1 << k)], msg_size
    elif alg == "ring":
        for _step in range(2 * (p - 1)):
            for i in range(p):
                yield participants[i], participants[(i + 1) % p], max(0, msg_size // p)
    elif alg == "reduce_scatter_allgather":
        log_p = _require_power_of_two(p, "reduce-scatter-allgather")
        halving = [(p >> (k + 1), msg_size >> (k + 1)) for k in range(log_p)]
        for dist, size in halving + halving[::-1]:
            for i in range(p):
                yield participants[i], participants[i ^ dist], size
    else:  # pragma: no cover - WorkloadSpec validates
        raise ScenarioError(f"unknown allreduce algorithm {alg!r}")


def plan_transfers(
    workload: WorkloadSpec,
    topology: ClusterTopology,
    tags: TagAllocator | None = None,
) -> list[LogicalMessage]:
    tags = tags or TagAllocator()
    ranks = topology.ranks
    out: list[LogicalMessage] = []

    def msg(src: int, dst: int, nbytes: int, mpi_fn: str):
        out.append(
            LogicalMessage(
                src_rank=src,
                dst_rank=dst,
                bytes=nbytes,
                mpi_fn=mpi_fn,
                tag=tags.next(src, dst),
                buffer_kind=workload.buffer_kind,
            )
        )

    if workload.pattern == "p2p_all_to_all":
        for _ in range(workload.iterations):
            for src in ranks:
                for dst in ranks:
                    if dst != src:
                        msg(src, dst, workload.msg_size, "MPI_Isend")

    elif workload.pattern == "allreduce":
        if workload.allreduce_style == "per_rank":
            for _ in range(workload.iterations):
                for src, dst, nbytes in _allreduce_rounds(
                    workload.allreduce_alg, ranks, workload.msg_size
                ):
                    msg(src, dst, nbytes, "MPI_Allreduce")
        else:  # node_leader
            leaders = [topology.leader(n) for n in topology.nodes]
            for _ in range(workload.iterations):
                for node in topology.nodes:
                    lead = topology.leader(node)
                    for r in node.ranks:
                        if r != lead:
                            msg(r, lead, workload.msg_size, "MPI_Allreduce")
                if len(leaders) > 1:
                    for src, dst, nbytes in _allreduce_rounds(
                        workload.allreduce_alg, leaders, workload.msg_size
                    ):
                        msg(src, dst, nbytes, "MPI_Allreduce")
                for node in topology.nodes:
                    lead = topology.leader(node)
                    for r in node.ranks:
                        if r != lead:
                            msg(lead, r, workload.msg_size, "MPI_Allreduce")

    elif workload.pattern == "halo_exchange":
        matrix = workload.demand_matrix
        p = len(ranks)
        if matrix is None or len(matrix) != p or any(len(row) != p for row in matrix):
            raise ScenarioError(f"demand_matrix must be {p}x{p}")
        for _ in range(workload.iterations):
            for i, src in enumerate(ranks):
                for j, dst in enumerate(ranks):
                    nbytes = matrix[i][j]
                    if nbytes < 0:
                        raise ScenarioError("demand_matrix entries must be >= 0")
                    if nbytes > 0:
                        msg(src, dst, nbytes, "MPI_Isend")

    else:  # pragma: no cover - WorkloadSpec validates
        raise ScenarioError(f"unknown pattern {workload.pattern!r}")

    return out
