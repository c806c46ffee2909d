"""On-disk layout: simulation output directories and their readers.

A simulation directory contains `<proc_uid>.comm.log` and
`<proc_uid>.alloc.log` per process, `topology.json`, `scenario.json` and
`ground_truth.json`. Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .correlate import TraceSet
from .emit import SimulationResult
from .errors import ScenarioError
from .logio import parse_alloc_log, parse_comm_log, write_alloc_log, write_comm_log
from .topology import ClusterTopology, Scenario
from .truth import GroundTruth, read_ground_truth, write_ground_truth

COMM_SUFFIX = ".comm.log"
ALLOC_SUFFIX = ".alloc.log"
TOPOLOGY_FILE = "topology.json"
SCENARIO_FILE = "scenario.json"
GROUND_TRUTH_FILE = "ground_truth.json"
CURATED_FILE = "curated.trace"
REPORT_FILE = "match-report.json"


def atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def write_simulation(result: SimulationResult, out_dir: str | Path) -> dict:
    """Write logs, topology, scenario and ground truth; returns counts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_uct = 0
    for uid, proc in result.processes.items():
        atomic_write(out / f"{uid}{COMM_SUFFIX}", write_comm_log(proc.log))
        atomic_write(out / f"{uid}{ALLOC_SUFFIX}", write_alloc_log(proc.allocs))
        n_uct += len(proc.log.uct_ops)
    atomic_write(
        out / TOPOLOGY_FILE,
        (json.dumps(result.scenario.topology.to_doc(), indent=2) + "\n").encode(),
    )
    atomic_write(out / SCENARIO_FILE, result.scenario.dumps().encode())
    atomic_write(out / GROUND_TRUTH_FILE, write_ground_truth(result.ground_truth))
    return {
        "processes": len(result.processes),
        "messages": len(result.messages),
        "uct_ops": n_uct,
    }


def load_trace_set(log_dir: str | Path) -> TraceSet:
    """Parse every per-process log in a directory into a TraceSet."""
    root = Path(log_dir)
    comm_files = sorted(root.glob(f"*{COMM_SUFFIX}"))
    if not comm_files:
        raise ScenarioError(f"no {COMM_SUFFIX} files in {root}")
    processes = {}
    allocs = {}
    for path in comm_files:
        uid = path.name[: -len(COMM_SUFFIX)]
        processes[uid] = parse_comm_log(path.read_bytes(), file=str(path))
        alloc_path = root / f"{uid}{ALLOC_SUFFIX}"
        if alloc_path.exists():
            allocs[uid] = parse_alloc_log(alloc_path.read_bytes(), file=str(alloc_path))
    topology = None
    topo_path = root / TOPOLOGY_FILE
    if topo_path.exists():
        topology = ClusterTopology.from_doc(json.loads(topo_path.read_text()))
    return TraceSet(processes=processes, allocs=allocs, topology=topology)


def load_scenario(path: str | Path) -> Scenario:
    return Scenario.loads(Path(path).read_bytes())


def load_ground_truth(log_dir: str | Path) -> GroundTruth:
    path = Path(log_dir) / GROUND_TRUTH_FILE
    return read_ground_truth(path.read_bytes(), file=str(path))
