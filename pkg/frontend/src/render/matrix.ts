/**
 * Communication matrix heatmap. Cell shading is monotone in the cell value;
 * hovering a cell opens a panel listing the per-MPI-function shares, which
 * by construction sum to the cell value. Every displayed number is copied
 * verbatim from the payload (raw values kept in data attributes).
 */

import { MatrixPayload } from "../api.js";
import { clear, emptyState, formatMetric } from "./util.js";

export function renderMatrix(container: HTMLElement, payload: MatrixPayload): void {
  clear(container);
  if (payload.procs.length === 0 || payload.cells.every((row) => row.every((v) => v === 0))) {
    emptyState(container, "no communications match the current filter");
    return;
  }
  const maxValue = Math.max(...payload.cells.map((row) => Math.max(...row)), 1);

  const table = document.createElement("table");
  table.className = "matrix";
  const head = table.createTHead().insertRow();
  head.insertCell().textContent = "src \\ dst";
  for (const rank of payload.ranks) {
    const th = document.createElement("th");
    th.textContent = String(rank);
    head.appendChild(th);
  }

  const hover = document.createElement("div");
  hover.className = "hover-panel";
  hover.hidden = true;

  const body = table.createTBody();
  payload.cells.forEach((row, i) => {
    const tr = body.insertRow();
    const th = document.createElement("th");
    th.textContent = String(payload.ranks[i]);
    tr.appendChild(th);
    row.forEach((value, j) => {
      const td = tr.insertCell();
      td.className = "cell";
      td.dataset.value = String(value);
      td.dataset.src = payload.procs[i];
      td.dataset.dst = payload.procs[j];
      const intensity = value / maxValue;
      td.style.backgroundColor = `rgba(30, 100, 200, ${intensity.toFixed(4)})`;
      td.title = `${payload.procs[i]} -> ${payload.procs[j]}: ${value}`;
      td.addEventListener("mouseenter", () => {
        showBreakdown(hover, payload, i, j, value);
      });
      td.addEventListener("mouseleave", () => {
        hover.hidden = true;
      });
    });
  });

  container.appendChild(table);
  container.appendChild(hover);
}

function showBreakdown(
  panel: HTMLElement,
  payload: MatrixPayload,
  i: number,
  j: number,
  cellValue: number,
): void {
  clear(panel);
  panel.hidden = false;
  const title = document.createElement("div");
  title.className = "hover-title";
  title.textContent = `${payload.procs[i]} -> ${payload.procs[j]} (${formatMetric(cellValue, payload.metric)})`;
  panel.appendChild(title);
  const breakdown = payload.breakdown[`${i}:${j}`] ?? {};
  for (const [fn, share] of Object.entries(breakdown)) {
    const row = document.createElement("div");
    row.className = "breakdown-row";
    row.dataset.mpiFn = fn;
    row.dataset.value = String(share);
    row.textContent = `${fn}: ${formatMetric(share, payload.metric)}`;
    panel.appendChild(row);
  }
}
