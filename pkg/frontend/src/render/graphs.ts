/**
 * Force-laid-out network graphs. The process view colors vertices by host
 * node; the device view encodes vertex kind by shape: squares for GPUs,
 * triangles for NICs, circles for host processes. Edge thickness is
 * monotone in weight, and vertices with no remaining edges are not drawn.
 */

import { DeviceGraphPayload, ProcessGraphPayload } from "../api.js";
import { forceLayout } from "../layout.js";
import { clear, emptyState, nodeColor, strokeWidth, svgEl } from "./util.js";

const WIDTH = 520;
const HEIGHT = 420;
const LAYOUT_SEED = 7;

function drawEdges(
  svg: SVGSVGElement,
  edges: { src: string; dst: string; weight: number }[],
  pos: Map<string, { x: number; y: number }>,
): void {
  const maxWeight = Math.max(...edges.map((e) => e.weight), 1);
  for (const e of edges) {
    const a = pos.get(e.src);
    const b = pos.get(e.dst);
    if (!a || !b) continue;
    const line = svgEl("line", {
      x1: a.x, y1: a.y, x2: b.x, y2: b.y,
      stroke: "#8888", "stroke-width": strokeWidth(e.weight, maxWeight).toFixed(3),
      class: "edge",
    });
    line.dataset.src = e.src;
    line.dataset.dst = e.dst;
    line.dataset.weight = String(e.weight);
    svg.appendChild(line);
  }
}

export function renderProcessGraph(container: HTMLElement, payload: ProcessGraphPayload): void {
  clear(container);
  if (payload.vertices.length === 0) {
    emptyState(container, "no processes match the current filter");
    return;
  }
  const svg = svgEl("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, class: "graph" });
  const ids = payload.vertices.map((v) => v.proc);
  const pos = forceLayout(
    ids,
    payload.edges.map((e) => [e.src, e.dst]),
    WIDTH, HEIGHT, LAYOUT_SEED,
  );
  drawEdges(svg, payload.edges, pos);
  const nodes = [...new Set(payload.vertices.map((v) => v.node))].sort();
  for (const v of payload.vertices) {
    const p = pos.get(v.proc)!;
    const circle = svgEl("circle", {
      cx: p.x, cy: p.y, r: 10,
      fill: nodeColor(v.node, nodes),
      class: "vertex",
    });
    circle.dataset.proc = v.proc;
    circle.dataset.node = v.node;
    svg.appendChild(circle);
    const label = svgEl("text", { x: p.x, y: p.y - 13, "text-anchor": "middle", class: "vlabel" });
    label.textContent = v.proc;
    svg.appendChild(label);
  }
  container.appendChild(svg);
}

export function renderDeviceGraph(container: HTMLElement, payload: DeviceGraphPayload): void {
  clear(container);
  if (payload.vertices.length === 0) {
    emptyState(container, "no device traffic matches the current filter");
    return;
  }
  const svg = svgEl("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, class: "graph" });
  const ids = payload.vertices.map((v) => v.id);
  const pos = forceLayout(
    ids,
    payload.edges.map((e) => [e.src, e.dst]),
    WIDTH, HEIGHT, LAYOUT_SEED,
  );
  drawEdges(svg, payload.edges, pos);
  const nodes = [...new Set(payload.vertices.map((v) => v.node))].sort();
  for (const v of payload.vertices) {
    const p = pos.get(v.id)!;
    const fill = nodeColor(v.node, nodes);
    let shape: SVGElement;
    if (v.kind === "gpu") {
      shape = svgEl("rect", { x: p.x - 9, y: p.y - 9, width: 18, height: 18, fill });
    } else if (v.kind === "nic") {
      const points = `${p.x},${p.y - 10} ${p.x - 9},${p.y + 8} ${p.x + 9},${p.y + 8}`;
      shape = svgEl("polygon", { points, fill });
    } else {
      shape = svgEl("circle", { cx: p.x, cy: p.y, r: 9, fill });
    }
    shape.classList.add("vertex");
    shape.dataset.id = v.id;
    shape.dataset.kind = v.kind;
    shape.dataset.shape = v.shape;
    svg.appendChild(shape);
    const label = svgEl("text", { x: p.x, y: p.y - 13, "text-anchor": "middle", class: "vlabel" });
    label.textContent = v.kind === "host" ? v.label : `${v.node}:${v.label}`;
    svg.appendChild(label);
  }
  container.appendChild(svg);
}
