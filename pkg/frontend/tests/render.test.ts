/**
 * Renderer conformance: every number shown in the DOM equals the value in
 * the API payload it came from (kept verbatim in data attributes), shapes
 * encode device kinds, and empty payloads yield explicit empty states.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { renderDeviceGraph, renderProcessGraph } from "../src/render/graphs.js";
import { renderMatrix } from "../src/render/matrix.js";
import { renderSummary } from "../src/render/summary.js";
import { renderTimeline } from "../src/render/timeline.js";
import { renderTop } from "../src/render/top.js";
import {
  dgraphPayload,
  matrixPayload,
  pgraphPayload,
  summaryPayload,
  timelinePayload,
  topPayload,
} from "./fixtures.js";

let container: HTMLElement;

beforeEach(() => {
  container = document.createElement("div");
  document.body.appendChild(container);
});

describe("matrix", () => {
  it("renders one cell per rank pair with the payload value", () => {
    renderMatrix(container, matrixPayload);
    const cells = container.querySelectorAll<HTMLElement>("td.cell");
    expect(cells.length).toBe(4);
    const byPair = new Map(
      [...cells].map((c) => [`${c.dataset.src}->${c.dataset.dst}`, Number(c.dataset.value)]),
    );
    expect(byPair.get("n0.p0->n0.p1")).toBe(matrixPayload.cells[0]![1]);
    expect(byPair.get("n0.p1->n0.p0")).toBe(matrixPayload.cells[1]![0]);
  });

  it("shades cells monotonically in value", () => {
    renderMatrix(container, matrixPayload);
    const alpha = (el: HTMLElement) => {
      const bg = el.style.backgroundColor;
      if (bg.startsWith("rgba")) {
        return Number(/,\s*([\d.]+)\)$/.exec(bg)?.[1] ?? "-1");
      }
      return bg.startsWith("rgb") ? 1 : -1; // rgb() means alpha was 1
    };
    const cells = [...container.querySelectorAll<HTMLElement>("td.cell")];
    const sorted = [...cells].sort((a, b) => Number(a.dataset.value) - Number(b.dataset.value));
    for (let i = 1; i < sorted.length; i++) {
      expect(alpha(sorted[i]!)).toBeGreaterThanOrEqual(alpha(sorted[i - 1]!));
    }
  });

  it("hover reveals the MPI breakdown summing to the cell value", () => {
    renderMatrix(container, matrixPayload);
    const cell = [...container.querySelectorAll<HTMLElement>("td.cell")].find(
      (c) => c.dataset.src === "n0.p1" && c.dataset.dst === "n0.p0",
    )!;
    cell.dispatchEvent(new Event("mouseenter"));
    const panel = container.querySelector<HTMLElement>(".hover-panel")!;
    expect(panel.hidden).toBe(false);
    const rows = [...panel.querySelectorAll<HTMLElement>(".breakdown-row")];
    const shares = Object.fromEntries(rows.map((r) => [r.dataset.mpiFn, Number(r.dataset.value)]));
    expect(shares).toEqual(matrixPayload.breakdown["1:0"]);
    const total = rows.reduce((acc, r) => acc + Number(r.dataset.value), 0);
    expect(total).toBe(Number(cell.dataset.value));
    cell.dispatchEvent(new Event("mouseleave"));
    expect(panel.hidden).toBe(true);
  });

  it("renders an explicit empty state, not a blank canvas", () => {
    renderMatrix(container, { ...matrixPayload, procs: [], ranks: [], cells: [], breakdown: {} });
    expect(container.querySelector(".empty-state")).not.toBeNull();
    expect(container.textContent).toContain("no communications");
  });
});

describe("process graph", () => {
  it("draws every vertex and edge with weights from the payload", () => {
    renderProcessGraph(container, pgraphPayload);
    const circles = container.querySelectorAll<SVGElement>("circle.vertex");
    expect(circles.length).toBe(3);
    const edges = [...container.querySelectorAll<SVGElement>("line.edge")];
    expect(edges.length).toBe(3);
    const weights = new Map(
      edges.map((e) => [`${e.dataset.src}->${e.dataset.dst}`, Number(e.dataset.weight)]),
    );
    for (const e of pgraphPayload.edges) {
      expect(weights.get(`${e.src}->${e.dst}`)).toBe(e.weight);
    }
  });

  it("colors same-node processes identically and edge width grows with weight", () => {
    renderProcessGraph(container, pgraphPayload);
    const fill = (proc: string) =>
      container.querySelector<SVGElement>(`circle[data-proc="${proc}"]`)!.getAttribute("fill");
    expect(fill("n0.p0")).toBe(fill("n0.p1"));
    expect(fill("n0.p0")).not.toBe(fill("n1.p2"));
    const width = (src: string) =>
      Number(
        container.querySelector<SVGElement>(`line[data-src="${src}"]`)!.getAttribute("stroke-width"),
      );
    expect(width("n0.p1")).toBeGreaterThan(width("n1.p2"));
    expect(width("n1.p2")).toBeGreaterThan(width("n0.p0"));
  });

  it("ring payloads draw a visible cycle", () => {
    const ring = {
      ...pgraphPayload,
      vertices: [0, 1, 2, 3].map((i) => ({ proc: `p${i}`, node: "n0" })),
      edges: [0, 1, 2, 3].map((i) => ({ src: `p${i}`, dst: `p${(i + 1) % 4}`, weight: 1 })),
    };
    renderProcessGraph(container, ring);
    expect(container.querySelectorAll("line.edge").length).toBe(4);
    expect(container.querySelectorAll("circle.vertex").length).toBe(4);
  });

  it("filtered-out vertices disappear (no orphan vertices are drawn)", () => {
    const reduced = {
      ...pgraphPayload,
      vertices: pgraphPayload.vertices.slice(0, 2),
      edges: [pgraphPayload.edges[0]!],
    };
    renderProcessGraph(container, reduced);
    expect(container.querySelectorAll("circle.vertex").length).toBe(2);
    expect(container.querySelector('circle[data-proc="n1.p2"]')).toBeNull();
  });
});

describe("device graph", () => {
  it("encodes kinds as square/triangle/circle", () => {
    renderDeviceGraph(container, dgraphPayload);
    expect(
      container.querySelector('rect.vertex[data-id="gpu:n0:0"]'),
    ).not.toBeNull();
    expect(
      container.querySelector('polygon.vertex[data-id="nic:n0:mlx5_0"]'),
    ).not.toBeNull();
    expect(
      container.querySelector('circle.vertex[data-id="host:n0.p0"]'),
    ).not.toBeNull();
    for (const v of dgraphPayload.vertices) {
      const el = container.querySelector<SVGElement>(`.vertex[data-id="${v.id}"]`)!;
      expect(el.dataset.kind).toBe(v.kind);
      expect(el.dataset.shape).toBe(v.shape);
    }
  });

  it("draws the three-leg NIC split with equal weights", () => {
    renderDeviceGraph(container, dgraphPayload);
    const legs = [...container.querySelectorAll<SVGElement>("line.edge")]
      .filter((e) => e.dataset.src!.includes("nic") || e.dataset.dst!.includes("nic"))
      .map((e) => Number(e.dataset.weight));
    expect(legs).toEqual([1048576, 1048576, 1048576]);
  });

  it("renders the empty state for empty payloads", () => {
    renderDeviceGraph(container, { ...dgraphPayload, vertices: [], edges: [] });
    expect(container.querySelector(".empty-state")).not.toBeNull();
  });
});

describe("timeline", () => {
  it("draws a bar per bin carrying the payload value", () => {
    renderTimeline(container, timelinePayload);
    const bars = [...container.querySelectorAll<SVGElement>("rect.bin")];
    expect(bars.length).toBe(8); // 2 procs x 4 bins
    const value = (proc: string, bin: number) =>
      Number(
        bars.find((b) => b.dataset.proc === proc && b.dataset.bin === String(bin))!.dataset.value,
      );
    expect(value("n0.p0", 0)).toBe(10);
    expect(value("n0.p0", 3)).toBe(30);
    expect(value("n0.p1", 1)).toBe(5);
    expect(value("n0.p1", 2)).toBe(0);
  });

  it("log scale compresses bar height ratios but keeps order", () => {
    renderTimeline(container, timelinePayload, { logScale: false });
    const h = (bin: number) =>
      Number(
        container.querySelector<SVGElement>(`rect.bin[data-proc="n0.p0"][data-bin="${bin}"]`)!
          .getAttribute("height"),
      );
    const linearRatio = h(3) / h(0);
    renderTimeline(container, timelinePayload, { logScale: true });
    const logRatio = h(3) / h(0);
    expect(linearRatio).toBeCloseTo(3, 5);
    expect(logRatio).toBeLessThan(linearRatio);
    expect(logRatio).toBeGreaterThan(1);
  });

  it("clicking a bin selects its time range", () => {
    let picked: [number, number] | null = null;
    renderTimeline(container, timelinePayload, {
      onRangeSelect: (a, b) => {
        picked = [a, b];
      },
    });
    container
      .querySelector<SVGElement>('rect.bin[data-proc="n0.p0"][data-bin="3"]')!
      .dispatchEvent(new Event("click"));
    expect(picked).toEqual([1300, 1399]);
  });
});

describe("top contenders", () => {
  it("shows every payload number verbatim in data attributes", () => {
    renderTop(container, topPayload);
    const rows = [...container.querySelectorAll<HTMLTableRowElement>("tbody tr")];
    expect(rows.length).toBe(topPayload.rows.length);
    rows.forEach((tr, i) => {
      const want = topPayload.rows[i]!;
      const raw = [...tr.cells].map((td) => td.dataset.raw);
      expect(raw).toEqual([
        want.uct_fn,
        want.transport,
        String(want.pct_bytes),
        String(want.pct_count),
        String(want.bytes),
        String(want.count),
      ]);
      expect(tr.cells[2]!.textContent).toBe(want.pct_bytes.toFixed(2));
    });
  });
});

describe("summary", () => {
  it("chips carry the raw payload values", () => {
    renderSummary(container, summaryPayload);
    const raw = Object.fromEntries(
      [...container.querySelectorAll<HTMLElement>(".chip")].map((c) => [
        c.dataset.label,
        c.dataset.raw,
      ]),
    );
    expect(raw).toEqual({
      processes: "4",
      communications: "24",
      bytes: String(summaryPayload.total_bytes),
      "protocol pairs": "12",
    });
  });
});
