import json
import threading
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from urllib.error import HTTPError

import pytest

from commtrace.correlate import TraceSet, build_curated
from commtrace.emit import emit
from commtrace.server import compute_view, default_bin_ns, make_server
from commtrace.views import FilterSpec

from conftest import make_scenario


@pytest.fixture(scope="module")
def trace():
    sc = make_scenario()
    r = emit(sc)
    ts = TraceSet(processes=r.logs(), allocs=r.alloc_logs(), topology=sc.topology)
    return build_curated(ts)[0]


@pytest.fixture(scope="module")
def server(trace):
    srv = make_server(trace, host="127.0.0.1", port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def url(server, path):
    host, port = server.server_address[:2]
    return f"http://{host}:{port}{path}"


def get(server, path):
    with urllib.request.urlopen(url(server, path)) as resp:
        return resp.status, json.loads(resp.read())


def test_matrix_with_no_params_echoes_empty_filter(server):
    status, doc = get(server, "/matrix")
    assert status == 200
    assert doc["schema_version"] == 1
    assert doc["filter"] == {
        "transports": None, "uct_fns": None, "mpi_fns": None,
        "nodes": None, "procs": None, "t_min": None, "t_max": None,
        "metric": "bytes",
    }
    assert doc["payload"]["view"] == "matrix"
    assert doc["timing_ms"] >= 0


def test_every_endpoint_responds(server):
    for path in ("/summary", "/matrix", "/graph/process", "/graph/device",
                 "/timeline", "/top", "/filters/options"):
        status, doc = get(server, path)
        assert status == 200
        assert "payload" in doc


def test_filtered_top_matches_direct_computation(server, trace):
    status, doc = get(server, "/top?transports=cuda_ipc&metric=count")
    assert status == 200
    spec = FilterSpec(transports=frozenset({"cuda_ipc"}), metric="count")
    expected = compute_view(trace, "top", spec, None)
    assert doc["payload"] == expected
    assert doc["filter"]["transports"] == ["cuda_ipc"]
    assert all(r["transport"] == "cuda_ipc" for r in doc["payload"]["rows"])
    assert sum(r["pct_count"] for r in doc["payload"]["rows"]) == pytest.approx(100, abs=0.01)


def test_repeated_keys_become_sets(server):
    status, doc = get(server, "/matrix?transports=cuda_ipc&transports=rc_mlx5")
    assert status == 200
    assert doc["filter"]["transports"] == ["cuda_ipc", "rc_mlx5"]


def test_device_graph_payload_has_shape_metadata(server):
    status, doc = get(server, "/graph/device?metric=bytes")
    assert status == 200
    shapes = {v["kind"]: v["shape"] for v in doc["payload"]["vertices"]}
    assert shapes.get("gpu") == "square"
    assert shapes.get("nic") == "triangle"


def test_malformed_filter_is_400(server):
    for path in ("/matrix?metric=lightyears", "/top?bogus=1",
                 "/matrix?t_min=abc", "/matrix?procs=ghost",
                 "/timeline?bin_ns=0"):
        with pytest.raises(HTTPError) as err:
            get(server, path)
        assert err.value.code == 400
        body = json.loads(err.value.read())
        assert "error" in body


def test_unknown_path_is_404(server):
    with pytest.raises(HTTPError) as err:
        get(server, "/nope")
    assert err.value.code == 404


def test_responses_stable_across_requests_and_concurrency(server):
    def fetch(_):
        return get(server, "/matrix?metric=count")[1]["payload"]

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(fetch, range(16)))
    assert all(r == results[0] for r in results)


def test_cli_and_http_payloads_byte_identical(server, trace):
    status, doc = get(server, "/graph/process?metric=bytes")
    spec = FilterSpec(metric="bytes")
    cli_doc = compute_view(trace, "pgraph", spec, None)
    assert json.dumps(doc["payload"], indent=2) == json.dumps(cli_doc, indent=2)


def test_timeline_default_binning_deterministic(server, trace):
    status, doc1 = get(server, "/timeline")
    _, doc2 = get(server, "/timeline")
    assert doc1["payload"] == doc2["payload"]
    assert doc1["payload"]["bin_ns"] == default_bin_ns(trace)
