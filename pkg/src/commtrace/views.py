"""Analytic views over a curated trace: matrix, graphs, timeline, top table.

All views share one filter algebra (conjunction of optional constraints) and
one metric switch (bytes transferred or number of communications). They are
pure functions of (trace, filter); documents produced here are served
verbatim by both the CLI and the HTTP API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curated import CuratedComm, CuratedTrace
from .errors import UnknownFilterValue, UnknownNode, UnknownProc
from .records import TRANSPORTS

SCHEMA_VERSION = 1

UCT_FN_NAMES = (
    "am_short", "am_bcopy", "am_zcopy",
    "put_short", "put_bcopy", "put_zcopy",
    "get_short", "get_bcopy", "get_zcopy",
)
METRICS = ("bytes", "count")
NO_MPI = "(none)"  # breakdown label for unattributed communications


@dataclass(frozen=True)
class FilterSpec:
    transports: frozenset[str] | None = None
    uct_fns: frozenset[str] | None = None
    mpi_fns: frozenset[str] | None = None
    nodes: frozenset[str] | None = None
    procs: frozenset[str] | None = None
    t_min: int | None = None
    t_max: int | None = None
    metric: str = "bytes"

    def __post_init__(self):
        for name in ("transports", "uct_fns", "mpi_fns", "nodes", "procs"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, frozenset(value))
        if self.metric not in METRICS:
            raise UnknownFilterValue(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.transports is not None:
            bad = self.transports - TRANSPORTS
            if bad:
                raise UnknownFilterValue(f"unknown transports: {sorted(bad)}")
        if self.uct_fns is not None:
            bad = self.uct_fns - set(UCT_FN_NAMES)
            if bad:
                raise UnknownFilterValue(f"unknown uct functions: {sorted(bad)}")
        if self.t_min is not None and self.t_max is not None and self.t_min > self.t_max:
            raise UnknownFilterValue("t_min > t_max")

    def to_doc(self) -> dict:
        return {
            "transports": sorted(self.transports) if self.transports is not None else None,
            "uct_fns": sorted(self.uct_fns) if self.uct_fns is not None else None,
            "mpi_fns": sorted(self.mpi_fns) if self.mpi_fns is not None else None,
            "nodes": sorted(self.nodes) if self.nodes is not None else None,
            "procs": sorted(self.procs) if self.procs is not None else None,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "metric": self.metric,
        }


def metric_value(comm: CuratedComm, metric: str) -> int:
    return comm.length if metric == "bytes" else 1


def apply_filter(trace: CuratedTrace, spec: FilterSpec) -> list[CuratedComm]:
    """Communications satisfying every present constraint.

    Node and process constraints are isolation filters: both endpoints must
    lie inside the selected set, which is what a "show me nodes 0 and 1"
    inspection expects.
    """
    node_of = {p.proc_uid: p.node for p in trace.processes}
    if spec.procs is not None:
        unknown = spec.procs - set(node_of)
        if unknown:
            raise UnknownProc(f"unknown processes in filter: {sorted(unknown)}")
    if spec.nodes is not None:
        unknown = spec.nodes - set(node_of.values())
        if unknown:
            raise UnknownNode(f"unknown nodes in filter: {sorted(unknown)}")

    out = []
    for c in trace.comms:
        if spec.transports is not None and c.transport not in spec.transports:
            continue
        if spec.uct_fns is not None and c.uct_fn not in spec.uct_fns:
            continue
        if spec.mpi_fns is not None and (c.mpi_fn is None or c.mpi_fn not in spec.mpi_fns):
            continue
        if spec.procs is not None and not (
            c.src_proc in spec.procs and c.dst_proc in spec.procs
        ):
            continue
        if spec.nodes is not None and not (
            node_of[c.src_proc] in spec.nodes and node_of[c.dst_proc] in spec.nodes
        ):
            continue
        if spec.t_min is not None and c.t_start < spec.t_min:
            continue
        if spec.t_max is not None and c.t_start > spec.t_max:
            continue
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# communication matrix

@dataclass
class CommMatrix:
    ranks: list[int]
    procs: list[str]
    values: np.ndarray  # P x P, metric units
    breakdown: dict[tuple[int, int], dict[str, int]]
    metric: str

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "view": "matrix",
            "metric": self.metric,
            "ranks": list(self.ranks),
            "procs": list(self.procs),
            "cells": [[int(v) for v in row] for row in self.values],
            "breakdown": {
                f"{i}:{j}": {k: int(v) for k, v in sorted(cell.items())}
                for (i, j), cell in sorted(self.breakdown.items())
            },
        }


def comm_matrix(trace: CuratedTrace, spec: FilterSpec) -> CommMatrix:
    procs = sorted(trace.processes, key=lambda p: p.rank)
    index = {p.proc_uid: i for i, p in enumerate(procs)}
    values = np.zeros((len(procs), len(procs)), dtype=np.int64)
    breakdown: dict[tuple[int, int], dict[str, int]] = {}
    for c in apply_filter(trace, spec):
        i, j = index[c.src_proc], index[c.dst_proc]
        m = metric_value(c, spec.metric)
        values[i, j] += m
        cell = breakdown.setdefault((i, j), {})
        label = c.mpi_fn if c.mpi_fn is not None else NO_MPI
        cell[label] = cell.get(label, 0) + m
    return CommMatrix(
        ranks=[p.rank for p in procs],
        procs=[p.proc_uid for p in procs],
        values=values,
        breakdown=breakdown,
        metric=spec.metric,
    )


# ---------------------------------------------------------------------------
# process graph

@dataclass
class ProcessGraph:
    vertices: list[dict]
    edges: list[dict]
    metric: str

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "view": "process_graph",
            "metric": self.metric,
            "vertices": self.vertices,
            "edges": self.edges,
        }


def process_graph(trace: CuratedTrace, spec: FilterSpec) -> ProcessGraph:
    node_of = {p.proc_uid: p.node for p in trace.processes}
    weights: dict[tuple[str, str], int] = {}
    for c in apply_filter(trace, spec):
        key = (c.src_proc, c.dst_proc)
        weights[key] = weights.get(key, 0) + metric_value(c, spec.metric)
    present = sorted({p for edge in weights for p in edge})
    return ProcessGraph(
        vertices=[{"proc": p, "node": node_of[p]} for p in present],
        edges=[
            {"src": s, "dst": d, "weight": int(w)}
            for (s, d), w in sorted(weights.items())
        ],
        metric=spec.metric,
    )


# ---------------------------------------------------------------------------
# device graph

SHAPES = {"gpu": "square", "nic": "triangle", "host": "circle"}


@dataclass
class DeviceGraph:
    vertices: list[dict]
    edges: list[dict]
    metric: str

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "view": "device_graph",
            "metric": self.metric,
            "vertices": self.vertices,
            "edges": self.edges,
        }


def device_graph(trace: CuratedTrace, spec: FilterSpec) -> DeviceGraph:
    """Per-device traffic; NIC-mediated communications split into the three
    legs device->NIC, NIC->NIC, NIC->device, each carrying the full metric."""
    node_of = {p.proc_uid: p.node for p in trace.processes}
    vertices: dict[str, dict] = {}
    weights: dict[tuple[str, str], int] = {}

    def vertex(kind: str, node: str, label: str) -> str:
        vid = f"{kind}:{label}" if kind == "host" else f"{kind}:{node}:{label}"
        if vid not in vertices:
            vertices[vid] = {
                "id": vid,
                "kind": kind,
                "node": node,
                "label": label,
                "shape": SHAPES[kind],
            }
        return vid

    def add(a: str, b: str, m: int):
        weights[(a, b)] = weights.get((a, b), 0) + m

    for c in apply_filter(trace, spec):
        m = metric_value(c, spec.metric)
        src_node, dst_node = node_of[c.src_proc], node_of[c.dst_proc]
        if c.src_gpu is not None:
            src_v = vertex("gpu", src_node, str(c.src_gpu))
        else:
            src_v = vertex("host", src_node, c.src_proc)
        if c.dst_gpu is not None:
            dst_v = vertex("gpu", dst_node, str(c.dst_gpu))
        else:
            dst_v = vertex("host", dst_node, c.dst_proc)
        if c.src_nic is not None:
            nic_s = vertex("nic", src_node, c.src_nic)
            nic_d = vertex("nic", dst_node, c.dst_nic)
            add(src_v, nic_s, m)
            add(nic_s, nic_d, m)
            add(nic_d, dst_v, m)
        else:
            add(src_v, dst_v, m)

    return DeviceGraph(
        vertices=[vertices[k] for k in sorted(vertices)],
        edges=[
            {"src": a, "dst": b, "weight": int(w)} for (a, b), w in sorted(weights.items())
        ],
        metric=spec.metric,
    )


# ---------------------------------------------------------------------------
# timeline

@dataclass
class Timeline:
    t0: int
    bin_ns: int
    bins: int
    series: dict[str, list[float]]
    spans: list[dict]
    metric: str

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "view": "timeline",
            "metric": self.metric,
            "t0": self.t0,
            "bin_ns": self.bin_ns,
            "bins": self.bins,
            "series": {k: self.series[k] for k in sorted(self.series)},
            "spans": self.spans,
        }


def timeline(trace: CuratedTrace, spec: FilterSpec, bin_ns: int) -> Timeline:
    """Per-process binned activity. An op's metric is split across the bins
    its [t_start, t_complete] span overlaps, proportionally to the overlap,
    so re-binning preserves totals; ops without a completion time are
    instantaneous. Quiet bins are reported as explicit zeros."""
    if bin_ns <= 0:
        raise UnknownFilterValue("bin_ns must be > 0")
    comms = apply_filter(trace, spec)
    if not comms:
        return Timeline(t0=0, bin_ns=bin_ns, bins=0, series={}, spans=[], metric=spec.metric)

    def span(c: CuratedComm) -> tuple[int, int]:
        end = c.t_complete if c.t_complete is not None else c.t_start
        return c.t_start, end

    t0 = spec.t_min if spec.t_min is not None else min(span(c)[0] for c in comms)
    t1 = spec.t_max if spec.t_max is not None else max(span(c)[1] for c in comms)
    t1 = max(t1, t0)
    nbins = (t1 - t0) // bin_ns + 1

    series: dict[str, list[float]] = {}
    spans: list[dict] = []
    for c in comms:
        s, e = span(c)
        m = metric_value(c, spec.metric)
        row = series.setdefault(c.proc, [0.0] * nbins)
        first = max(0, min(nbins - 1, (s - t0) // bin_ns))
        last = max(0, min(nbins - 1, (e - t0) // bin_ns))
        if e == s or first == last:
            row[first] += float(m)
        else:
            total = e - s
            for b in range(first, last + 1):
                lo = max(s, t0 + b * bin_ns)
                hi = min(e, t0 + (b + 1) * bin_ns)
                if hi > lo:
                    row[b] += m * (hi - lo) / total
        spans.append(
            {"proc": c.proc, "seq": c.seq, "t_start": s, "t_end": e, "metric": int(m)}
        )
    spans.sort(key=lambda d: (d["proc"], d["seq"]))
    return Timeline(
        t0=t0, bin_ns=bin_ns, bins=nbins, series=series, spans=spans, metric=spec.metric
    )


# ---------------------------------------------------------------------------
# top contenders

@dataclass
class TopContenders:
    rows: list[dict]
    metric: str

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "view": "top_contenders",
            "metric": self.metric,
            "rows": self.rows,
        }


def top_contenders(trace: CuratedTrace, spec: FilterSpec) -> TopContenders:
    """Transport-function usage table: share of bytes and of transfer count
    per (uct function, transport), against the filtered totals."""
    comms = apply_filter(trace, spec)
    groups: dict[tuple[str, str], list[int]] = {}
    for c in comms:
        g = groups.setdefault((c.uct_fn, c.transport), [0, 0])
        g[0] += c.length
        g[1] += 1
    total_bytes = sum(g[0] for g in groups.values())
    total_count = sum(g[1] for g in groups.values())
    rows = []
    for (fn, transport), (b, n) in groups.items():
        rows.append(
            {
                "uct_fn": fn,
                "transport": transport,
                "pct_bytes": 100.0 * b / total_bytes if total_bytes else 0.0,
                "pct_count": 100.0 * n / total_count if total_count else 0.0,
                "bytes": int(b),
                "count": int(n),
            }
        )
    rows.sort(key=lambda r: (-r["pct_bytes"], r["uct_fn"], r["transport"]))
    return TopContenders(rows=rows, metric=spec.metric)


# ---------------------------------------------------------------------------
# summary / filter options

def summary(trace: CuratedTrace, spec: FilterSpec) -> dict:
    comms = apply_filter(trace, spec)
    return {
        "schema_version": SCHEMA_VERSION,
        "view": "summary",
        "metric": spec.metric,
        "processes": len(trace.processes),
        "comms": len(comms),
        "total_bytes": int(sum(c.length for c in comms)),
        "ucp_pairs": len(trace.ucp_pairs),
        "t_min": min((c.t_start for c in comms), default=None),
        "t_max": max(
            (c.t_complete if c.t_complete is not None else c.t_start for c in comms),
            default=None,
        ),
    }


def filter_options(trace: CuratedTrace) -> dict:
    ends = [
        c.t_complete if c.t_complete is not None else c.t_start for c in trace.comms
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "view": "filter_options",
        "transports": sorted({c.transport for c in trace.comms}),
        "uct_fns": sorted({c.uct_fn for c in trace.comms}),
        "mpi_fns": sorted({c.mpi_fn for c in trace.comms if c.mpi_fn is not None}),
        "nodes": sorted({p.node for p in trace.processes}),
        "procs": sorted({p.proc_uid for p in trace.processes}),
        "t_min": min((c.t_start for c in trace.comms), default=None),
        "t_max": max(ends, default=None),
        "metrics": list(METRICS),
    }
