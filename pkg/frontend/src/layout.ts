/**
 * Deterministic force-directed layout. The seed is fixed by callers so a
 * given graph always lands in the same arrangement (test stability and
 * stable visuals across refreshes).
 */

export interface Point {
  x: number;
  y: number;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function forceLayout(
  ids: string[],
  edges: [string, string][],
  width: number,
  height: number,
  seed = 1,
  iterations = 200,
): Map<string, Point> {
  const rand = mulberry32(seed);
  const pos = new Map<string, Point>();
  const vel = new Map<string, Point>();
  for (const id of ids) {
    pos.set(id, { x: (rand() - 0.5) * width * 0.8, y: (rand() - 0.5) * height * 0.8 });
    vel.set(id, { x: 0, y: 0 });
  }
  const index = new Map(ids.map((id, i) => [id, i]));
  const springs = edges
    .filter(([a, b]) => index.has(a) && index.has(b) && a !== b)
    .map(([a, b]) => [a, b] as const);

  const repulsion = (width * height) / Math.max(1, ids.length) / 4;
  const springLength = Math.min(width, height) / Math.max(2, Math.sqrt(ids.length));
  for (let it = 0; it < iterations; it++) {
    const cool = 1 - it / iterations;
    for (let i = 0; i < ids.length; i++) {
      const a = pos.get(ids[i]!)!;
      const force = { x: -a.x * 0.02, y: -a.y * 0.02 }; // gentle centering
      for (let j = 0; j < ids.length; j++) {
        if (i === j) continue;
        const b = pos.get(ids[j]!)!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(25, dx * dx + dy * dy);
        const f = repulsion / d2;
        force.x += dx * f * 0.05;
        force.y += dy * f * 0.05;
      }
      const v = vel.get(ids[i]!)!;
      v.x = (v.x + force.x) * 0.6;
      v.y = (v.y + force.y) * 0.6;
    }
    for (const [sa, sb] of springs) {
      const a = pos.get(sa)!;
      const b = pos.get(sb)!;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(1, Math.hypot(dx, dy));
      const f = ((dist - springLength) / dist) * 0.05;
      const va = vel.get(sa)!;
      const vb = vel.get(sb)!;
      va.x += dx * f;
      va.y += dy * f;
      vb.x -= dx * f;
      vb.y -= dy * f;
    }
    for (const id of ids) {
      const p = pos.get(id)!;
      const v = vel.get(id)!;
      p.x += v.x * cool;
      p.y += v.y * cool;
    }
  }
  // normalize into the viewport with a margin
  const xs = ids.map((id) => pos.get(id)!.x);
  const ys = ids.map((id) => pos.get(id)!.y);
  const minX = Math.min(...xs, -1);
  const maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, -1);
  const maxY = Math.max(...ys, 1);
  const margin = 30;
  for (const id of ids) {
    const p = pos.get(id)!;
    p.x = margin + ((p.x - minX) / (maxX - minX)) * (width - 2 * margin);
    p.y = margin + ((p.y - minY) / (maxY - minY)) * (height - 2 * margin);
  }
  return pos;
}
