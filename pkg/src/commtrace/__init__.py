"""commtrace: desk-scale multi-layer communication profiling toolkit.

Simulates per-process transport/protocol trace logs from a described
cluster, correlates them across processes into a curated, fully attributed
trace, and computes the analytic views (matrix, graphs, timeline, top
contenders) served to the interactive explorer.
"""

from .completion import CompletionRegistry, CompletionGroup, RegistryConfig
from .correlate import AttributionOptions, MatchReport, TraceSet, build_curated
from .curated import CuratedComm, CuratedTrace, read_curated, write_curated
from .emit import SimulationResult, emit
from .logio import parse_alloc_log, parse_comm_log, write_alloc_log, write_comm_log
from .paths import select_path
from .plan import LogicalMessage, plan_transfers
from .topology import ClusterTopology, NodeSpec, ProtocolConfig, Scenario, WorkloadSpec
from .views import (
    FilterSpec,
    apply_filter,
    comm_matrix,
    device_graph,
    process_graph,
    timeline,
    top_contenders,
)

__version__ = "0.1.0"

__all__ = [
    "AttributionOptions",
    "ClusterTopology",
    "CompletionGroup",
    "CompletionRegistry",
    "CuratedComm",
    "CuratedTrace",
    "FilterSpec",
    "LogicalMessage",
    "MatchReport",
    "NodeSpec",
    "ProtocolConfig",
    "RegistryConfig",
    "Scenario",
    "SimulationResult",
    "TraceSet",
    "WorkloadSpec",
    "apply_filter",
    "build_curated",
    "comm_matrix",
    "device_graph",
    "emit",
    "parse_alloc_log",
    "parse_comm_log",
    "plan_transfers",
    "process_graph",
    "read_curated",
    "select_path",
    "timeline",
    "top_contenders",
    "write_alloc_log",
    "write_comm_log",
    "write_curated",
]
