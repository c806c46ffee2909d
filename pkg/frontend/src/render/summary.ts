import { SummaryPayload } from "../api.js";
import { clear, formatBytes } from "./util.js";

export function renderSummary(container: HTMLElement, payload: SummaryPayload): void {
  clear(container);
  const entries: [string, string, string][] = [
    ["processes", String(payload.processes), String(payload.processes)],
    ["communications", String(payload.comms), String(payload.comms)],
    ["bytes", formatBytes(payload.total_bytes), String(payload.total_bytes)],
    ["protocol pairs", String(payload.ucp_pairs), String(payload.ucp_pairs)],
  ];
  for (const [label, text, raw] of entries) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.dataset.label = label;
    chip.dataset.raw = raw;
    chip.textContent = `${label}: ${text}`;
    container.appendChild(chip);
  }
}
