/**
 * Typed client for the commtrace HTTP API.
 *
 * The UI never computes analytics itself: every number it shows comes out of
 * one of these payloads. Set-valued filter fields serialize as repeated
 * query keys, matching the server's conventions.
 */

export type Metric = "bytes" | "count";

export interface FilterState {
  transports: string[] | null;
  uct_fns: string[] | null;
  mpi_fns: string[] | null;
  nodes: string[] | null;
  procs: string[] | null;
  t_min: number | null;
  t_max: number | null;
  metric: Metric;
}

export function emptyFilter(): FilterState {
  return {
    transports: null,
    uct_fns: null,
    mpi_fns: null,
    nodes: null,
    procs: null,
    t_min: null,
    t_max: null,
    metric: "bytes",
  };
}

const SET_KEYS = ["transports", "uct_fns", "mpi_fns", "nodes", "procs"] as const;

export function filterQuery(filter: FilterState, binNs?: number | null): string {
  const parts: string[] = [];
  for (const key of SET_KEYS) {
    const values = filter[key];
    if (values) {
      for (const v of [...values].sort()) {
        parts.push(`${key}=${encodeURIComponent(v)}`);
      }
    }
  }
  if (filter.t_min !== null) parts.push(`t_min=${filter.t_min}`);
  if (filter.t_max !== null) parts.push(`t_max=${filter.t_max}`);
  parts.push(`metric=${filter.metric}`);
  if (binNs !== undefined && binNs !== null) parts.push(`bin_ns=${binNs}`);
  return parts.join("&");
}

// ---------------------------------------------------------------------------
// payload shapes (mirrors the server's view documents)

export interface Envelope<T> {
  schema_version: number;
  filter: Record<string, unknown>;
  payload: T;
  timing_ms: number;
}

export interface MatrixPayload {
  schema_version: number;
  view: "matrix";
  metric: Metric;
  ranks: number[];
  procs: string[];
  cells: number[][];
  breakdown: Record<string, Record<string, number>>;
}

export interface ProcessGraphPayload {
  schema_version: number;
  view: "process_graph";
  metric: Metric;
  vertices: { proc: string; node: string }[];
  edges: { src: string; dst: string; weight: number }[];
}

export interface DeviceGraphPayload {
  schema_version: number;
  view: "device_graph";
  metric: Metric;
  vertices: { id: string; kind: "host" | "gpu" | "nic"; node: string; label: string; shape: string }[];
  edges: { src: string; dst: string; weight: number }[];
}

export interface TimelinePayload {
  schema_version: number;
  view: "timeline";
  metric: Metric;
  t0: number;
  bin_ns: number;
  bins: number;
  series: Record<string, number[]>;
  spans: { proc: string; seq: number; t_start: number; t_end: number; metric: number }[];
}

export interface TopPayload {
  schema_version: number;
  view: "top_contenders";
  metric: Metric;
  rows: {
    uct_fn: string;
    transport: string;
    pct_bytes: number;
    pct_count: number;
    bytes: number;
    count: number;
  }[];
}

export interface SummaryPayload {
  schema_version: number;
  view: "summary";
  metric: Metric;
  processes: number;
  comms: number;
  total_bytes: number;
  ucp_pairs: number;
  t_min: number | null;
  t_max: number | null;
}

export interface OptionsPayload {
  schema_version: number;
  view: "filter_options";
  transports: string[];
  uct_fns: string[];
  mpi_fns: string[];
  nodes: string[];
  procs: string[];
  t_min: number | null;
  t_max: number | null;
  metrics: Metric[];
}

export type ViewName = "summary" | "matrix" | "pgraph" | "dgraph" | "timeline" | "top";

export const VIEW_PATHS: Record<ViewName | "options", string> = {
  summary: "/summary",
  matrix: "/matrix",
  pgraph: "/graph/process",
  dgraph: "/graph/device",
  timeline: "/timeline",
  top: "/top",
  options: "/filters/options",
};

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  async view<T>(view: ViewName, filter: FilterState, binNs?: number | null): Promise<Envelope<T>> {
    const query = filterQuery(filter, view === "timeline" ? binNs : undefined);
    const url = `${this.base}${VIEW_PATHS[view]}?${query}`;
    const resp = await this.fetchFn(url);
    if (!resp.ok) {
      throw new ApiError(`GET ${url} -> ${resp.status}`, resp.status);
    }
    return (await resp.json()) as Envelope<T>;
  }

  async options(): Promise<OptionsPayload> {
    const resp = await this.fetchFn(`${this.base}${VIEW_PATHS.options}`);
    if (!resp.ok) {
      throw new ApiError(`options -> ${resp.status}`, resp.status);
    }
    const env = (await resp.json()) as Envelope<OptionsPayload>;
    return env.payload;
  }
}
