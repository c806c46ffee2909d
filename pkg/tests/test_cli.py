import json
from pathlib import Path

import pytest

from commtrace.cli import main
from commtrace.store import CURATED_FILE, GROUND_TRUTH_FILE, REPORT_FILE

from conftest import make_scenario, make_topology
from commtrace.topology import WorkloadSpec


@pytest.fixture
def scenario_file(tmp_path) -> Path:
    sc = make_scenario(topology=make_topology(n_nodes=2, ranks_per_node=1))
    path = tmp_path / "scenario.json"
    path.write_text(sc.dumps())
    return path


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_simulate_writes_expected_files(tmp_path, scenario_file, capsys):
    out = tmp_path / "sim"
    code, stdout, _ = run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(out))
    assert code == 0
    assert "2 processes" in stdout
    names = {p.name for p in out.iterdir()}
    assert {
        "n0.p0.comm.log", "n0.p0.alloc.log", "n1.p1.comm.log", "n1.p1.alloc.log",
        "topology.json", "scenario.json", GROUND_TRUTH_FILE,
    } <= names


def test_simulate_deterministic_directory(tmp_path, scenario_file, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(out1))[0] == 0
    assert run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(out2))[0] == 0
    for p1 in sorted(out1.iterdir()):
        assert p1.read_bytes() == (out2 / p1.name).read_bytes()


def test_simulate_rejects_bad_scenario(tmp_path, capsys):
    sc = tmp_path / "bad.json"
    sc.write_text(json.dumps({
        "topology": {"nodes": [{"name": "n0", "ranks": [0, 1, 2, 3, 4, 5]}]},
        "protocol": {},
        "workloads": [{
            "pattern": "allreduce", "msg_size": 64, "buffer_kind": "host",
            "allreduce_alg": "recursive_doubling", "allreduce_style": "per_rank",
        }],
    }))
    code, _, err = run(capsys, "simulate", "--scenario", str(sc), "--out", str(tmp_path / "x"))
    assert code == 2
    assert "UnsupportedSize" in err and "power-of-two" in err


def test_correlate_and_analyze_pipeline(tmp_path, scenario_file, capsys):
    sim = tmp_path / "sim"
    out = tmp_path / "cur"
    run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(sim))
    code, stdout, _ = run(capsys, "correlate", "--logs", str(sim), "--out", str(out))
    assert code == 0
    assert "0 ambiguities" in stdout
    report = json.loads((out / REPORT_FILE).read_text())
    assert report["counts"]["unlinked"] == 0
    assert report["schema_version"] == 1

    code, stdout, _ = run(capsys, "analyze", "--curated", str(out / CURATED_FILE), "matrix")
    assert code == 0
    doc = json.loads(stdout)
    assert doc["view"] == "matrix" and len(doc["cells"]) == 2

    code, stdout, _ = run(
        capsys, "analyze", "--curated", str(out / CURATED_FILE), "top",
        "--transport", "rc_mlx5", "--metric", "count",
    )
    assert code == 0
    top = json.loads(stdout)
    assert all(r["transport"] == "rc_mlx5" for r in top["rows"])


def test_correlate_exit_2_names_file_and_line(tmp_path, scenario_file, capsys):
    sim = tmp_path / "sim"
    run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(sim))
    victim = sim / "n0.p0.comm.log"
    lines = victim.read_bytes().splitlines()
    target = len(lines) // 2
    lines[target] = b"{corrupt"
    victim.write_bytes(b"\n".join(lines) + b"\n")
    code, _, err = run(capsys, "correlate", "--logs", str(sim), "--out", str(tmp_path / "c"))
    assert code == 2
    assert f"n0.p0.comm.log:{target + 1}" in err


def test_correlate_without_alloc_logs_notes_host_fallback(tmp_path, scenario_file, capsys):
    sim = tmp_path / "sim"
    run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(sim))
    for p in sim.glob("*.alloc.log"):
        p.unlink()
    out = tmp_path / "cur"
    code, _, _ = run(capsys, "correlate", "--logs", str(sim), "--out", str(out))
    assert code == 0
    report = json.loads((out / REPORT_FILE).read_text())
    assert any("host" in note for note in report["notes"])


def test_analyze_unknown_view_or_filter_is_exit_2(tmp_path, scenario_file, capsys):
    sim, cur = tmp_path / "sim", tmp_path / "cur"
    run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(sim))
    run(capsys, "correlate", "--logs", str(sim), "--out", str(cur))
    curated = str(cur / CURATED_FILE)
    with pytest.raises(SystemExit):  # argparse rejects unknown view names
        main(["analyze", "--curated", curated, "hologram"])
    code, _, err = run(capsys, "analyze", "--curated", curated, "top", "--uct-fn", "bogus_fn")
    assert code == 2 and "bogus_fn" in err
    code, _, err = run(capsys, "analyze", "--curated", curated, "matrix", "--proc", "ghost")
    assert code == 2


def test_no_ucp_attribution_flag_changes_rendezvous_attribution(tmp_path, scenario_file, capsys):
    sim = tmp_path / "sim"
    run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(sim))
    on, off = tmp_path / "on", tmp_path / "off"
    run(capsys, "correlate", "--logs", str(sim), "--out", str(on))
    run(capsys, "correlate", "--logs", str(sim), "--out", str(off), "--no-ucp-attribution")

    def mpi_of_get(path):
        code, stdout, _ = run(
            capsys, "analyze", "--curated", str(path / CURATED_FILE), "top",
            "--uct-fn", "get_zcopy", "--mpi-fn", "MPI_Wait", "--metric", "count",
        )
        assert code == 0
        return sum(r["count"] for r in json.loads(stdout)["rows"])

    assert mpi_of_get(off) > 0
    assert mpi_of_get(on) == 0


def test_timeline_view_with_bin_flag(tmp_path, scenario_file, capsys):
    sim, cur = tmp_path / "sim", tmp_path / "cur"
    run(capsys, "simulate", "--scenario", str(scenario_file), "--out", str(sim))
    run(capsys, "correlate", "--logs", str(sim), "--out", str(cur))
    code, stdout, _ = run(
        capsys, "analyze", "--curated", str(cur / CURATED_FILE), "timeline",
        "--bin-ns", "5000",
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["bin_ns"] == 5000 and doc["bins"] >= 1


def test_missing_file_is_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "analyze", "--curated", str(tmp_path / "nope"), "matrix")
    assert code == 2


def test_mixed_workload_scenario_roundtrip(tmp_path, capsys):
    sc = make_scenario(
        workloads=[
            WorkloadSpec(pattern="p2p_all_to_all", msg_size=1 << 20, buffer_kind="gpu"),
            WorkloadSpec(
                pattern="allreduce", msg_size=8192, buffer_kind="host",
                allreduce_alg="ring", allreduce_style="per_rank",
            ),
        ]
    )
    path = tmp_path / "scenario.json"
    path.write_text(sc.dumps())
    sim, cur = tmp_path / "sim", tmp_path / "cur"
    assert run(capsys, "simulate", "--scenario", str(path), "--out", str(sim))[0] == 0
    code, stdout, _ = run(capsys, "correlate", "--logs", str(sim), "--out", str(cur))
    assert code == 0 and "0 ambiguities" in stdout
