from __future__ import annotations

import pytest

from commtrace.topology import ClusterTopology, NodeSpec, ProtocolConfig, Scenario, WorkloadSpec


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: criterion-level acceptance test")


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_")
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {verdict}", flush=True)


def make_topology(
    n_nodes: int = 2,
    ranks_per_node: int = 2,
    gpus: int = 2,
    nics: int = 2,
    numa_correct: bool = True,
) -> ClusterTopology:
    nodes = []
    for ni in range(n_nodes):
        ranks = [ni * ranks_per_node + k for k in range(ranks_per_node)]
        nodes.append(
            NodeSpec(
                name=f"n{ni}",
                ranks=ranks,
                gpus=gpus,
                nics=[f"mlx5_{k}" for k in range(nics)],
                numa_correct={r: numa_correct for r in ranks},
            )
        )
    return ClusterTopology(nodes)


def make_scenario(
    topology: ClusterTopology | None = None,
    workloads: list[WorkloadSpec] | None = None,
    **proto_kwargs,
) -> Scenario:
    topology = topology or make_topology()
    workloads = workloads or [
        WorkloadSpec(pattern="p2p_all_to_all", msg_size=1 << 20, buffer_kind="gpu")
    ]
    proto_kwargs.setdefault("seed", 7)
    proto_kwargs.setdefault("rndv_scheme", "get")
    return Scenario(topology, ProtocolConfig(**proto_kwargs), workloads)


@pytest.fixture
def topo2x2() -> ClusterTopology:
    return make_topology()
