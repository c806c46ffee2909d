"""Cluster topology, protocol configuration and workload descriptions.

A scenario file is a single JSON document with three sections::

    {"topology": {...}, "protocol": {...}, "workloads": [{...}, ...]}

Topology is the simulator's ground truth and the legend for the analytic
views: nodes with ranks, GPU counts, NIC names and affinity maps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ScenarioError

RNDV_SCHEMES = ("auto", "get", "put")
PATTERNS = ("p2p_all_to_all", "allreduce", "halo_exchange")
ALLREDUCE_ALGS = ("recursive_doubling", "reduce_scatter_allgather", "ring")
ALLREDUCE_STYLES = ("per_rank", "node_leader")
BUFFER_KINDS = ("host", "gpu")


@dataclass
class NodeSpec:
    name: str
    ranks: list[int]
    gpus: int = 0
    nics: list[str] = field(default_factory=list)
    gpu_nic_affinity: dict[int, str] = field(default_factory=dict)
    rank_gpu_affinity: dict[int, int | None] = field(default_factory=dict)
    numa_correct: dict[int, bool] = field(default_factory=dict)

    def __post_init__(self):
        if self.gpus and self.nics and not self.gpu_nic_affinity:
            self.gpu_nic_affinity = {
                g: self.nics[g % len(self.nics)] for g in range(self.gpus)
            }
        if self.gpus and not self.rank_gpu_affinity:
            self.rank_gpu_affinity = {
                r: (i if i < self.gpus else None) for i, r in enumerate(self.ranks)
            }
        for r in self.ranks:
            self.numa_correct.setdefault(r, True)


@dataclass
class ClusterTopology:
    nodes: list[NodeSpec]

    def __post_init__(self):
        seen: set[int] = set()
        for node in self.nodes:
            for r in node.ranks:
                if r in seen:
                    raise ScenarioError(f"rank {r} appears on more than one node")
                seen.add(r)
            if node.nics:
                for g in range(node.gpus):
                    nic = node.gpu_nic_affinity.get(g)
                    if nic is None or nic not in node.nics:
                        raise ScenarioError(
                            f"node {node.name}: gpu {g} needs exactly one affine NIC"
                        )
            for r, g in node.rank_gpu_affinity.items():
                if g is not None and not 0 <= g < node.gpus:
                    raise ScenarioError(f"node {node.name}: rank {r} bound to unknown gpu {g}")
        self._rank_node = {r: n for n in self.nodes for r in n.ranks}

    @property
    def ranks(self) -> list[int]:
        return sorted(self._rank_node)

    @property
    def total_ranks(self) -> int:
        return len(self._rank_node)

    def node_of(self, rank: int) -> NodeSpec:
        try:
            return self._rank_node[rank]
        except KeyError:
            raise ScenarioError(f"unknown rank {rank}") from None

    def proc_uid(self, rank: int) -> str:
        return f"{self.node_of(rank).name}.p{rank}"

    def local_index(self, rank: int) -> int:
        return self.node_of(rank).ranks.index(rank)

    def gpu_of(self, rank: int) -> int | None:
        return self.node_of(rank).rank_gpu_affinity.get(rank)

    def host_nic(self, rank: int) -> str | None:
        """The NIC a host task uses; each task keeps a single dedicated NIC."""
        node = self.node_of(rank)
        if not node.nics:
            return None
        return node.nics[self.local_index(rank) % len(node.nics)]

    def gpu_nic(self, rank: int) -> str | None:
        node = self.node_of(rank)
        gpu = self.gpu_of(rank)
        if gpu is None or not node.nics:
            return None
        if not node.numa_correct.get(rank, True):
            return node.nics[0]  # misbound task falls back to the node's shared NIC
        return node.gpu_nic_affinity.get(gpu)

    def leader(self, node: NodeSpec) -> int:
        return min(node.ranks)

    def to_doc(self) -> dict:
        return {
            "nodes": [
                {
                    "name": n.name,
                    "ranks": list(n.ranks),
                    "gpus": n.gpus,
                    "nics": list(n.nics),
                    "gpu_nic_affinity": {str(k): v for k, v in sorted(n.gpu_nic_affinity.items())},
                    "rank_gpu_affinity": {
                        str(k): v for k, v in sorted(n.rank_gpu_affinity.items())
                    },
                    "numa_correct": {str(k): v for k, v in sorted(n.numa_correct.items())},
                }
                for n in self.nodes
            ]
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ClusterTopology":
        try:
            nodes = [
                NodeSpec(
                    name=nd["name"],
                    ranks=list(nd["ranks"]),
                    gpus=nd.get("gpus", 0),
                    nics=list(nd.get("nics", [])),
                    gpu_nic_affinity={int(k): v for k, v in nd.get("gpu_nic_affinity", {}).items()},
                    rank_gpu_affinity={
                        int(k): v for k, v in nd.get("rank_gpu_affinity", {}).items()
                    },
                    numa_correct={int(k): v for k, v in nd.get("numa_correct", {}).items()},
                )
                for nd in doc["nodes"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad topology document: {exc}") from None
        return cls(nodes)


@dataclass
class ProtocolConfig:
    rndv_thresh: int = 8192
    rndv_scheme: str = "auto"
    eager_enabled: bool = True
    cuda_ipc_enabled: bool = True
    dc_task_threshold: int = 64
    clock_drift_ns: dict[str, int] = field(default_factory=dict)
    seed: int = 0
    completion_pool_size: int = 128
    jitter_ns: int = 0

    def __post_init__(self):
        if self.rndv_thresh <= 0:
            raise ScenarioError("rndv_thresh must be > 0")
        if self.rndv_scheme not in RNDV_SCHEMES:
            raise ScenarioError(f"unknown rndv_scheme {self.rndv_scheme!r}")
        if self.completion_pool_size < 1:
            raise ScenarioError("completion_pool_size must be >= 1")
        if self.jitter_ns < 0:
            raise ScenarioError("jitter_ns must be >= 0")

    def to_doc(self) -> dict:
        return {
            "rndv_thresh": self.rndv_thresh,
            "rndv_scheme": self.rndv_scheme,
            "eager_enabled": self.eager_enabled,
            "cuda_ipc_enabled": self.cuda_ipc_enabled,
            "dc_task_threshold": self.dc_task_threshold,
            "clock_drift_ns": dict(sorted(self.clock_drift_ns.items())),
            "seed": self.seed,
            "completion_pool_size": self.completion_pool_size,
            "jitter_ns": self.jitter_ns,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ProtocolConfig":
        known = {
            "rndv_thresh", "rndv_scheme", "eager_enabled", "cuda_ipc_enabled",
            "dc_task_threshold", "clock_drift_ns", "seed", "completion_pool_size",
            "jitter_ns",
        }
        unknown = set(doc) - known
        if unknown:
            raise ScenarioError(f"unknown protocol keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class WorkloadSpec:
    pattern: str
    iterations: int = 1
    msg_size: int = 0
    buffer_kind: str = "host"
    allreduce_alg: str | None = None
    allreduce_style: str | None = None
    demand_matrix: list[list[int]] | None = None

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ScenarioError(f"unknown workload pattern {self.pattern!r}")
        if self.iterations < 1:
            raise ScenarioError("iterations must be >= 1")
        if self.buffer_kind not in BUFFER_KINDS:
            raise ScenarioError(f"unknown buffer_kind {self.buffer_kind!r}")
        if self.pattern == "allreduce":
            if self.allreduce_alg not in ALLREDUCE_ALGS:
                raise ScenarioError(f"allreduce needs allreduce_alg, got {self.allreduce_alg!r}")
            if self.allreduce_style not in ALLREDUCE_STYLES:
                raise ScenarioError(
                    f"allreduce needs allreduce_style, got {self.allreduce_style!r}"
                )
        elif self.allreduce_alg is not None or self.allreduce_style is not None:
            raise ScenarioError("allreduce fields only valid for the allreduce pattern")
        if self.pattern == "halo_exchange":
            if self.demand_matrix is None:
                raise ScenarioError("halo_exchange needs demand_matrix")
        elif self.demand_matrix is not None:
            raise ScenarioError("demand_matrix only valid for halo_exchange")
        if self.pattern != "halo_exchange" and self.msg_size < 0:
            raise ScenarioError("msg_size must be >= 0")

    def to_doc(self) -> dict:
        doc: dict = {
            "pattern": self.pattern,
            "iterations": self.iterations,
            "msg_size": self.msg_size,
            "buffer_kind": self.buffer_kind,
        }
        if self.allreduce_alg is not None:
            doc["allreduce_alg"] = self.allreduce_alg
            doc["allreduce_style"] = self.allreduce_style
        if self.demand_matrix is not None:
            doc["demand_matrix"] = self.demand_matrix
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "WorkloadSpec":
        known = {
            "pattern", "iterations", "msg_size", "buffer_kind",
            "allreduce_alg", "allreduce_style", "demand_matrix",
        }
        unknown = set(doc) - known
        if unknown:
            raise ScenarioError(f"unknown workload keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class Scenario:
    topology: ClusterTopology
    protocol: ProtocolConfig
    workloads: list[WorkloadSpec]

    def to_doc(self) -> dict:
        return {
            "topology": self.topology.to_doc(),
            "protocol": self.protocol.to_doc(),
            "workloads": [w.to_doc() for w in self.workloads],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_doc(), indent=2) + "\n"

    @classmethod
    def from_doc(cls, doc: dict) -> "Scenario":
        if not isinstance(doc, dict):
            raise ScenarioError("scenario must be a JSON object")
        for key in ("topology", "protocol", "workloads"):
            if key not in doc:
                raise ScenarioError(f"scenario is missing the {key!r} section")
        workloads = [WorkloadSpec.from_doc(w) for w in doc["workloads"]]
        if not workloads:
            raise ScenarioError("scenario has no workloads")
        return cls(
            topology=ClusterTopology.from_doc(doc["topology"]),
            protocol=ProtocolConfig.from_doc(doc["protocol"]),
            workloads=workloads,
        )

    @classmethod
    def loads(cls, text: str | bytes) -> "Scenario":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc.msg}") from None
        return cls.from_doc(doc)
