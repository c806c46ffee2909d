export function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

export function emptyState(el: HTMLElement, message: string): void {
  clear(el);
  const div = document.createElement("div");
  div.className = "empty-state";
  div.textContent = message;
  el.appendChild(div);
}

export function formatBytes(n: number): string {
  if (n >= 1 << 30) return `${(n / (1 << 30)).toFixed(2)} GiB`;
  if (n >= 1 << 20) return `${(n / (1 << 20)).toFixed(2)} MiB`;
  if (n >= 1 << 10) return `${(n / (1 << 10)).toFixed(2)} KiB`;
  return `${n} B`;
}

export function formatMetric(value: number, metric: string): string {
  return metric === "bytes" ? formatBytes(value) : String(value);
}

const PALETTE = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759",
  "#b07aa1", "#76b7b2", "#edc948", "#ff9da7",
];

/** Stable color per node name: processes on the same node share a color. */
export function nodeColor(node: string, nodes: string[]): string {
  const i = Math.max(0, nodes.indexOf(node));
  return PALETTE[i % PALETTE.length]!;
}

export const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) {
    el.setAttribute(k, String(v));
  }
  return el;
}

/** Edge thickness, strictly monotone in weight. */
export function strokeWidth(weight: number, maxWeight: number): number {
  if (maxWeight <= 0) return 1;
  return 1 + 5 * (weight / maxWeight);
}
