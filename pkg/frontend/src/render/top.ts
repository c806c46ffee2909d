/**
 * Top-contenders table: transport-function usage with byte and count shares,
 * in the payload's order (already sorted by byte share). Raw payload values
 * ride along in data attributes; the visible text is a fixed two-decimal
 * rendering of exactly those values.
 */

import { TopPayload } from "../api.js";
import { clear, emptyState, formatBytes } from "./util.js";

export function renderTop(container: HTMLElement, payload: TopPayload): void {
  clear(container);
  if (payload.rows.length === 0) {
    emptyState(container, "no communications match the current filter");
    return;
  }
  const table = document.createElement("table");
  table.className = "top";
  const head = table.createTHead().insertRow();
  for (const caption of ["function", "transport", "bytes %", "count %", "bytes", "count"]) {
    const th = document.createElement("th");
    th.textContent = caption;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const row of payload.rows) {
    const tr = body.insertRow();
    tr.dataset.uctFn = row.uct_fn;
    tr.dataset.transport = row.transport;
    const cells: [string, string][] = [
      [row.uct_fn, row.uct_fn],
      [row.transport, row.transport],
      [row.pct_bytes.toFixed(2), String(row.pct_bytes)],
      [row.pct_count.toFixed(2), String(row.pct_count)],
      [formatBytes(row.bytes), String(row.bytes)],
      [String(row.count), String(row.count)],
    ];
    for (const [text, raw] of cells) {
      const td = tr.insertCell();
      td.textContent = text;
      td.dataset.raw = raw;
    }
  }
  container.appendChild(table);
}
