/**
 * Explorer bootstrap: wires the API client, the shared ViewState and the six
 * panels (summary strip, timeline, matrix, process graph, device graph, top
 * table) plus the filter sidebar. The API base defaults to the local server
 * and can be overridden with ?api=http://host:port.
 */

import {
  ApiClient,
  DeviceGraphPayload,
  MatrixPayload,
  ProcessGraphPayload,
  SummaryPayload,
  TimelinePayload,
  TopPayload,
  ViewName,
} from "./api.js";
import { renderFilterPanel } from "./render/filters.js";
import { renderDeviceGraph, renderProcessGraph } from "./render/graphs.js";
import { renderMatrix } from "./render/matrix.js";
import { renderSummary } from "./render/summary.js";
import { renderTimeline } from "./render/timeline.js";
import { renderTop } from "./render/top.js";
import { ViewState } from "./state.js";

let rootDoc: Document;

function panel(id: string): HTMLElement {
  const el = rootDoc.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

export async function boot(
  root: Document = document,
  apiOverride?: ApiClient,
): Promise<ViewState> {
  rootDoc = root;
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const base = params.get("api") ?? "http://127.0.0.1:8077";
  const api = apiOverride ?? new ApiClient(base);

  let logScale = false;
  let lastTimeline: TimelinePayload | null = null;

  const drawTimeline = () => {
    if (lastTimeline) {
      renderTimeline(panel("timeline"), lastTimeline, {
        logScale,
        onRangeSelect: (t0, t1) => void state.setTimeRange(t0, t1),
      });
    }
  };

  const state = new ViewState(
    api,
    {
      summary: (p) => renderSummary(panel("summary"), p as SummaryPayload),
      matrix: (p) => renderMatrix(panel("matrix"), p as MatrixPayload),
      pgraph: (p) => renderProcessGraph(panel("pgraph"), p as ProcessGraphPayload),
      dgraph: (p) => renderDeviceGraph(panel("dgraph"), p as DeviceGraphPayload),
      timeline: (p) => {
        lastTimeline = p as TimelinePayload;
        drawTimeline();
      },
      top: (p) => renderTop(panel("top"), p as TopPayload),
    },
    {
      onError: (view: ViewName, error: unknown) => {
        const el = root.getElementById("status");
        if (el) el.textContent = `failed to load ${view}: ${String(error)}`;
      },
    },
  );

  const options = await api.options();
  renderFilterPanel(panel("filters"), options, state, {
    onLogScale: (enabled) => {
      logScale = enabled;
      drawTimeline();
    },
  });
  await state.refresh();
  return state;
}

if (typeof document !== "undefined" && document.getElementById("filters")) {
  void boot();
}
