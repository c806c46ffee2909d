import {
  DeviceGraphPayload,
  Envelope,
  FetchLike,
  MatrixPayload,
  OptionsPayload,
  ProcessGraphPayload,
  SummaryPayload,
  TimelinePayload,
  TopPayload,
} from "../src/api.js";

export const matrixPayload: MatrixPayload = {
  schema_version: 1,
  view: "matrix",
  metric: "bytes",
  ranks: [0, 1],
  procs: ["n0.p0", "n0.p1"],
  cells: [
    [0, 1048576],
    [2048, 0],
  ],
  breakdown: {
    "0:1": { MPI_Isend: 1048576 },
    "1:0": { MPI_Isend: 1024, MPI_Allreduce: 1024 },
  },
};

export const pgraphPayload: ProcessGraphPayload = {
  schema_version: 1,
  view: "process_graph",
  metric: "bytes",
  vertices: [
    { proc: "n0.p0", node: "n0" },
    { proc: "n0.p1", node: "n0" },
    { proc: "n1.p2", node: "n1" },
  ],
  edges: [
    { src: "n0.p0", dst: "n0.p1", weight: 10 },
    { src: "n0.p1", dst: "n1.p2", weight: 90 },
    { src: "n1.p2", dst: "n0.p0", weight: 50 },
  ],
};

export const dgraphPayload: DeviceGraphPayload = {
  schema_version: 1,
  view: "device_graph",
  metric: "bytes",
  vertices: [
    { id: "gpu:n0:0", kind: "gpu", node: "n0", label: "0", shape: "square" },
    { id: "nic:n0:mlx5_0", kind: "nic", node: "n0", label: "mlx5_0", shape: "triangle" },
    { id: "nic:n1:mlx5_0", kind: "nic", node: "n1", label: "mlx5_0", shape: "triangle" },
    { id: "gpu:n1:0", kind: "gpu", node: "n1", label: "0", shape: "square" },
    { id: "host:n0.p0", kind: "host", node: "n0", label: "n0.p0", shape: "circle" },
  ],
  edges: [
    { src: "gpu:n0:0", dst: "nic:n0:mlx5_0", weight: 1048576 },
    { src: "nic:n0:mlx5_0", dst: "nic:n1:mlx5_0", weight: 1048576 },
    { src: "nic:n1:mlx5_0", dst: "gpu:n1:0", weight: 1048576 },
    { src: "host:n0.p0", dst: "gpu:n0:0", weight: 64 },
  ],
};

export const timelinePayload: TimelinePayload = {
  schema_version: 1,
  view: "timeline",
  metric: "bytes",
  t0: 1000,
  bin_ns: 100,
  bins: 4,
  series: {
    "n0.p0": [10, 0, 0, 30],
    "n0.p1": [0, 5, 0, 0],
  },
  spans: [],
};

export const topPayload: TopPayload = {
  schema_version: 1,
  view: "top_contenders",
  metric: "bytes",
  rows: [
    {
      uct_fn: "get_zcopy", transport: "rc_mlx5",
      pct_bytes: 66.3567, pct_count: 16.6667, bytes: 4194304, count: 4,
    },
    {
      uct_fn: "am_zcopy", transport: "rc_mlx5",
      pct_bytes: 33.6433, pct_count: 83.3333, bytes: 2126912, count: 20,
    },
  ],
};

export const summaryPayload: SummaryPayload = {
  schema_version: 1,
  view: "summary",
  metric: "bytes",
  processes: 4,
  comms: 24,
  total_bytes: 6321216,
  ucp_pairs: 12,
  t_min: 1000,
  t_max: 90000,
};

export const optionsPayload: OptionsPayload = {
  schema_version: 1,
  view: "filter_options",
  transports: ["cuda_ipc", "rc_mlx5", "sysv"],
  uct_fns: ["am_zcopy", "get_zcopy"],
  mpi_fns: ["MPI_Isend"],
  nodes: ["n0", "n1"],
  procs: ["n0.p0", "n0.p1", "n1.p2"],
  t_min: 1000,
  t_max: 90000,
  metrics: ["bytes", "count"],
};

const PAYLOADS: Record<string, unknown> = {
  "/summary": summaryPayload,
  "/matrix": matrixPayload,
  "/graph/process": pgraphPayload,
  "/graph/device": dgraphPayload,
  "/timeline": timelinePayload,
  "/top": topPayload,
  "/filters/options": optionsPayload,
};

export class FakeApi {
  requests: string[] = [];
  delays = new Map<string, Promise<void>>();

  fetch: FetchLike = async (url: string) => {
    this.requests.push(url);
    const parsed = new URL(url);
    const gate = this.delays.get(parsed.pathname);
    if (gate) await gate;
    const payload = PAYLOADS[parsed.pathname];
    if (payload === undefined) {
      return { ok: false, status: 404, json: async () => ({ error: "unknown path" }) };
    }
    const envelope: Envelope<unknown> = {
      schema_version: 1,
      filter: Object.fromEntries(parsed.searchParams.entries()),
      payload,
      timing_ms: 0.1,
    };
    return { ok: true, status: 200, json: async () => envelope };
  };

  queriesFor(path: string): string[] {
    return this.requests
      .filter((u) => new URL(u).pathname === path)
      .map((u) => new URL(u).search.slice(1));
  }
}
