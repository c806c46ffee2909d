"""Command-line entry points: simulate | correlate | analyze | serve.

Exit codes: 0 success, 2 user error (bad scenario, malformed logs, unknown
view or filter value), 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import store
from .correlate import AttributionOptions, build_curated
from .curated import read_curated, write_curated
from .errors import CommtraceError, FilterError, InvariantViolation, TraceFormatError
from .server import compute_view, default_bin_ns, make_server
from .views import FilterSpec

log = logging.getLogger("commtrace")

VIEWS = ("matrix", "pgraph", "dgraph", "timeline", "top", "summary", "options")


def _add_filter_args(p: argparse.ArgumentParser):
    p.add_argument("--transport", action="append", dest="transports", metavar="T")
    p.add_argument("--uct-fn", action="append", dest="uct_fns", metavar="FN")
    p.add_argument("--mpi-fn", action="append", dest="mpi_fns", metavar="FN")
    p.add_argument("--node", action="append", dest="nodes", metavar="NODE")
    p.add_argument("--proc", action="append", dest="procs", metavar="PROC")
    p.add_argument("--t-min", type=int, default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--metric", choices=("bytes", "count"), default="bytes")


def _filter_from_args(args) -> FilterSpec:
    def fs(values):
        return frozenset(values) if values else None

    return FilterSpec(
        transports=fs(args.transports),
        uct_fns=fs(args.uct_fns),
        mpi_fns=fs(args.mpi_fns),
        nodes=fs(args.nodes),
        procs=fs(args.procs),
        t_min=args.t_min,
        t_max=args.t_max,
        metric=args.metric,
    )


def cmd_simulate(args) -> int:
    scenario = store.load_scenario(args.scenario)
    if args.seed is not None:
        scenario.protocol.seed = args.seed
    from .emit import emit

    result = emit(scenario)
    counts = store.write_simulation(result, args.out)
    print(
        f"simulate: {counts['processes']} processes, {counts['messages']} messages, "
        f"{counts['uct_ops']} transport ops -> {args.out}"
    )
    return 0


def cmd_correlate(args) -> int:
    traces = store.load_trace_set(args.logs)
    options = AttributionOptions(
        ucp_attribution=not args.no_ucp_attribution,
        mpi_attribution=not args.no_mpi_attribution,
        device_attribution=not args.no_device_attribution,
    )
    trace, report = build_curated(traces, options)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    store.atomic_write(out / store.CURATED_FILE, write_curated(trace))
    store.atomic_write(out / store.REPORT_FILE, report.dumps().encode())
    print(
        f"correlate: {report.linked}/{report.total_uct} ops linked, "
        f"{report.matched_pairs} ucp pairs, {report.associated} associated, "
        f"{len(report.ambiguities)} ambiguities -> {out}"
    )
    return 0


def cmd_analyze(args) -> int:
    trace = read_curated(Path(args.curated).read_bytes(), file=args.curated)
    spec = _filter_from_args(args)
    bin_ns = args.bin_ns if args.bin_ns is not None else default_bin_ns(trace)
    doc = compute_view(trace, args.view, spec, bin_ns)
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_serve(args) -> int:
    trace = read_curated(Path(args.curated).read_bytes(), file=args.curated)
    if not 1024 <= args.port <= 65535:
        raise CommtraceError(f"port must be in [1024, 65535], got {args.port}")
    server = make_server(trace, host=args.host, port=args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commtrace",
        description="Simulate, correlate and explore transport-level communication traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="expand a scenario into per-process logs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("correlate", help="merge per-process logs into a curated trace")
    p.add_argument("--logs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-ucp-attribution", action="store_true")
    p.add_argument("--no-mpi-attribution", action="store_true")
    p.add_argument("--no-device-attribution", action="store_true")
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("analyze", help="print one analytic view as JSON")
    p.add_argument("--curated", required=True)
    p.add_argument("view", choices=VIEWS)
    _add_filter_args(p)
    p.add_argument("--bin-ns", type=int, default=None, help="timeline bin width")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("serve", help="serve the HTTP JSON API for the explorer UI")
    p.add_argument("--curated", required=True)
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("COMMTRACE_LOG_LEVEL", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (TraceFormatError, FilterError, CommtraceError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
