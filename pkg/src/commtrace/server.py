"""Read-only HTTP JSON API serving analytic views to the explorer UI.

Stateless by construction: every request recomputes its view from the
immutable in-memory curated trace, so concurrent reads are safe and
restarting the server never changes a response. Filters arrive as query
parameters (repeated keys for set membership); responses are wrapped in an
envelope that echoes the parsed filter.
"""

from __future__ import annotations

import json
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, urlsplit

from .curated import CuratedTrace
from .errors import FilterError
from .views import (
    FilterSpec,
    comm_matrix,
    device_graph,
    filter_options,
    process_graph,
    summary,
    timeline,
    top_contenders,
)

ENVELOPE_SCHEMA_VERSION = 1

_SET_PARAMS = {
    "transports": "transports",
    "uct_fns": "uct_fns",
    "mpi_fns": "mpi_fns",
    "nodes": "nodes",
    "procs": "procs",
}
_INT_PARAMS = {"t_min", "t_max", "bin_ns"}


def parse_filter_query(query: str) -> tuple[FilterSpec, int | None]:
    """Build a FilterSpec (and optional bin_ns) from a URL query string."""
    sets: dict[str, set[str]] = {}
    ints: dict[str, int] = {}
    metric = "bytes"
    for key, value in parse_qsl(query, keep_blank_values=True):
        if key in _SET_PARAMS:
            sets.setdefault(key, set()).add(value)
        elif key in _INT_PARAMS:
            try:
                ints[key] = int(value)
            except ValueError:
                raise FilterError(f"parameter {key!r} must be an integer") from None
        elif key == "metric":
            metric = value
        else:
            raise FilterError(f"unknown filter parameter {key!r}")
    spec = FilterSpec(
        transports=frozenset(sets["transports"]) if "transports" in sets else None,
        uct_fns=frozenset(sets["uct_fns"]) if "uct_fns" in sets else None,
        mpi_fns=frozenset(sets["mpi_fns"]) if "mpi_fns" in sets else None,
        nodes=frozenset(sets["nodes"]) if "nodes" in sets else None,
        procs=frozenset(sets["procs"]) if "procs" in sets else None,
        t_min=ints.get("t_min"),
        t_max=ints.get("t_max"),
        metric=metric,
    )
    return spec, ints.get("bin_ns")


def default_bin_ns(trace: CuratedTrace) -> int:
    """Deterministic default: about 100 bins across the whole trace."""
    if not trace.comms:
        return 1
    t0 = min(c.t_start for c in trace.comms)
    t1 = max(c.t_complete if c.t_complete is not None else c.t_start for c in trace.comms)
    return max(1, (t1 - t0) // 100 + 1)


def compute_view(trace: CuratedTrace, view: str, spec: FilterSpec, bin_ns: int | None) -> dict:
    if view == "summary":
        return summary(trace, spec)
    if view == "matrix":
        return comm_matrix(trace, spec).to_doc()
    if view == "pgraph":
        return process_graph(trace, spec).to_doc()
    if view == "dgraph":
        return device_graph(trace, spec).to_doc()
    if view == "timeline":
        if bin_ns is None:
            bin_ns = default_bin_ns(trace)
        return timeline(trace, spec, bin_ns).to_doc()
    if view == "top":
        return top_contenders(trace, spec).to_doc()
    if view == "options":
        return filter_options(trace)
    raise FilterError(f"unknown view {view!r}")


_ROUTES = {
    "/summary": "summary",
    "/matrix": "matrix",
    "/graph/process": "pgraph",
    "/graph/device": "dgraph",
    "/timeline": "timeline",
    "/top": "top",
    "/filters/options": "options",
}


class _Handler(BaseHTTPRequestHandler):
    trace: CuratedTrace  # set on the server class

    def do_GET(self):  # noqa: N802 (http.server API)
        parts = urlsplit(self.path)
        view = _ROUTES.get(parts.path)
        if view is None:
            self._send(404, {"error": f"unknown path {parts.path!r}"})
            return
        started = time.perf_counter()
        try:
            spec, bin_ns = parse_filter_query(parts.query)
            payload = compute_view(self.server.trace, view, spec, bin_ns)
        except FilterError as exc:
            self._send(400, {"error": str(exc)})
            return
        except Exception as exc:  # internal bug: answer with JSON, not a dropped socket
            self._send(500, {"error": f"internal error: {exc}"})
            return
        envelope = {
            "schema_version": ENVELOPE_SCHEMA_VERSION,
            "filter": spec.to_doc(),
            "payload": payload,
            "timing_ms": (time.perf_counter() - started) * 1000.0,
        }
        self._send(200, envelope)

    def _send(self, status: int, doc: dict):
        body = (json.dumps(doc, indent=2) + "\n").encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):  # quiet by default
        pass


class ExplorerServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, trace: CuratedTrace, host: str = "127.0.0.1", port: int = 8077):
        super().__init__((host, port), _Handler)
        self.trace = trace


def make_server(trace: CuratedTrace, host: str = "127.0.0.1", port: int = 8077) -> ExplorerServer:
    return ExplorerServer(trace, host, port)
