/**
 * Per-process activity over time. One row per process, one bar per bin;
 * quiet periods stay visibly empty. Bar heights scale linearly or, with the
 * log toggle, by log1p, which keeps low-volume phases visible next to
 * bursts. Clicking a bin narrows the shared time filter to that bin.
 */

import { TimelinePayload } from "../api.js";
import { clear, emptyState, svgEl } from "./util.js";

const ROW_H = 26;
const BAR_H = 20;
const WIDTH = 520;

export interface TimelineHooks {
  onRangeSelect?: (tMin: number, tMax: number) => void;
  logScale?: boolean;
}

export function renderTimeline(
  container: HTMLElement,
  payload: TimelinePayload,
  hooks: TimelineHooks = {},
): void {
  clear(container);
  const procs = Object.keys(payload.series).sort();
  if (procs.length === 0 || payload.bins === 0) {
    emptyState(container, "no activity in the selected window");
    return;
  }
  const scale = hooks.logScale ? (v: number) => Math.log1p(v) : (v: number) => v;
  const maxScaled = Math.max(
    ...procs.map((p) => Math.max(...payload.series[p]!.map(scale))),
    1e-9,
  );
  const height = procs.length * ROW_H + 20;
  const svg = svgEl("svg", { viewBox: `0 0 ${WIDTH} ${height}`, class: "timeline" });
  const labelW = 90;
  const binW = (WIDTH - labelW) / payload.bins;

  procs.forEach((proc, row) => {
    const y = row * ROW_H + 10;
    const label = svgEl("text", { x: labelW - 6, y: y + BAR_H - 6, "text-anchor": "end", class: "vlabel" });
    label.textContent = proc;
    svg.appendChild(label);
    payload.series[proc]!.forEach((value, bin) => {
      const h = value > 0 ? Math.max(1, (scale(value) / maxScaled) * BAR_H) : 0;
      const rect = svgEl("rect", {
        x: labelW + bin * binW,
        y: y + BAR_H - h,
        width: Math.max(0.5, binW - 0.5),
        height: h,
        fill: value > 0 ? "#4e79a7" : "transparent",
        class: "bin",
      });
      rect.dataset.proc = proc;
      rect.dataset.bin = String(bin);
      rect.dataset.value = String(value);
      if (hooks.onRangeSelect) {
        rect.addEventListener("click", () => {
          const t0 = payload.t0 + bin * payload.bin_ns;
          hooks.onRangeSelect!(t0, t0 + payload.bin_ns - 1);
        });
      }
      svg.appendChild(rect);
    });
  });
  container.appendChild(svg);
}
