/** Client-side 2D placement for molecule graphs.
 *
 * The engine ships coordinate-free graphs; every position is computed here.
 * The layout is a small force-directed embedding seeded by chromosome id, so
 * the same molecule always lands the same way, and a repair pass guarantees
 * that no two atoms sit closer than 1% of the canvas diagonal.
 */

import type { GraphPayload } from "./types.js";

export class EmptyGraphError extends Error {
  constructor() {
    super("cannot lay out a molecule with no atoms");
    this.name = "EmptyGraphError";
  }
}

export interface Point {
  x: number;
  y: number;
}

export interface CanvasSpec {
  width: number;
  height: number;
  padding?: number;
}

export const DEFAULT_CANVAS: CanvasSpec = { width: 260, height: 200, padding: 20 };

/** Minimum pairwise node distance the layout promises, in canvas units. */
export function minSeparation(canvas: CanvasSpec): number {
  return 0.01 * Math.hypot(canvas.width, canvas.height);
}

/** mulberry32 — tiny deterministic PRNG; quality is ample for layout jitter. */
export function seededRng(seed: number): () => number {
  let a = (Math.imul(seed, 2654435761) ^ 0x9e3779b9) >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

interface Vec {
  x: number;
  y: number;
}

function fruchtermanReingold(
  n: number,
  edges: Array<[number, number]>,
  rng: () => number,
): Vec[] {
  // Abstract space is an L x L square with ideal edge length k = 1.
  const L = Math.sqrt(n);
  const pos: Vec[] = [];
  for (let i = 0; i < n; i++) {
    const angle = (2 * Math.PI * i) / n + rng() * 0.25;
    const radius = L / 2 + rng() * 0.1;
    pos.push({ x: radius * Math.cos(angle), y: radius * Math.sin(angle) });
  }

  const iterations = 220;
  let temp = L / 2;
  const cool = temp / (iterations + 1);
  const disp: Vec[] = pos.map(() => ({ x: 0, y: 0 }));

  for (let it = 0; it < iterations; it++) {
    for (let i = 0; i < n; i++) {
      disp[i].x = 0;
      disp[i].y = 0;
    }
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = pos[i].x - pos[j].x;
        const dy = pos[i].y - pos[j].y;
        const dist = Math.max(Math.hypot(dx, dy), 1e-6);
        const rep = 1 / dist; // k^2 / dist with k = 1
        const ux = dx / dist;
        const uy = dy / dist;
        disp[i].x += ux * rep;
        disp[i].y += uy * rep;
        disp[j].x -= ux * rep;
        disp[j].y -= uy * rep;
      }
    }
    for (const [a, b] of edges) {
      const dx = pos[a].x - pos[b].x;
      const dy = pos[a].y - pos[b].y;
      const dist = Math.max(Math.hypot(dx, dy), 1e-6);
      const att = dist * dist; // dist^2 / k with k = 1
      const ux = dx / dist;
      const uy = dy / dist;
      disp[a].x -= ux * att;
      disp[a].y -= uy * att;
      disp[b].x += ux * att;
      disp[b].y += uy * att;
    }
    for (let i = 0; i < n; i++) {
      const len = Math.hypot(disp[i].x, disp[i].y);
      if (len < 1e-12) continue;
      const step = Math.min(len, temp);
      pos[i].x += (disp[i].x / len) * step;
      pos[i].y += (disp[i].y / len) * step;
    }
    temp -= cool;
  }
  return pos;
}

function fitToCanvas(pos: Vec[], canvas: CanvasSpec, padding: number): Point[] {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of pos) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  const bw = maxX - minX;
  const bh = maxY - minY;
  const availW = canvas.width - 2 * padding;
  const availH = canvas.height - 2 * padding;
  const sx = bw > 1e-9 ? availW / bw : Infinity;
  const sy = bh > 1e-9 ? availH / bh : Infinity;
  let s = Math.min(sx, sy);
  if (!Number.isFinite(s)) s = 1; // all nodes coincide; repair pass spreads them
  return pos.map((p) => ({
    x: padding + (p.x - minX) * s + (availW - bw * s) / 2,
    y: padding + (p.y - minY) * s + (availH - bh * s) / 2,
  }));
}

/** Push apart any pair closer than the floor; returns true once clean. */
function separate(
  pts: Point[],
  floor: number,
  lo: Point,
  hi: Point,
  rng: () => number,
): boolean {
  const clamp = (p: Point) => {
    p.x = Math.min(Math.max(p.x, lo.x), hi.x);
    p.y = Math.min(Math.max(p.y, lo.y), hi.y);
  };
  for (let pass = 0; pass < 150; pass++) {
    let moved = false;
    for (let i = 0; i < pts.length; i++) {
      for (let j = i + 1; j < pts.length; j++) {
        const dx = pts[j].x - pts[i].x;
        const dy = pts[j].y - pts[i].y;
        const dist = Math.hypot(dx, dy);
        if (dist >= floor) continue;
        let ux: number;
        let uy: number;
        if (dist < 1e-9) {
          const angle = rng() * 2 * Math.PI;
          ux = Math.cos(angle);
          uy = Math.sin(angle);
        } else {
          ux = dx / dist;
          uy = dy / dist;
        }
        const push = (floor - dist) / 2 + floor * 0.05;
        pts[i].x -= ux * push;
        pts[i].y -= uy * push;
        pts[j].x += ux * push;
        pts[j].y += uy * push;
        clamp(pts[i]);
        clamp(pts[j]);
        moved = true;
      }
    }
    if (!moved) return true;
  }
  return minPairDistance(pts) >= floor;
}

export function minPairDistance(pts: Point[]): number {
  let best = Infinity;
  for (let i = 0; i < pts.length; i++) {
    for (let j = i + 1; j < pts.length; j++) {
      best = Math.min(best, Math.hypot(pts[j].x - pts[i].x, pts[j].y - pts[i].y));
    }
  }
  return best;
}

/** Last-resort placement: a grid always meets the spacing floor. */
function gridFallback(n: number, floor: number, lo: Point, hi: Point): Point[] {
  const step = floor * 1.5;
  const cols = Math.max(1, Math.floor((hi.x - lo.x) / step) + 1);
  const pts: Point[] = [];
  for (let i = 0; i < n; i++) {
    pts.push({ x: lo.x + (i % cols) * step, y: lo.y + Math.floor(i / cols) * step });
  }
  return pts;
}

/**
 * Compute canvas coordinates for every node of `graph`.
 *
 * Deterministic: the same (graph, chromosomeId, canvas) triple always yields
 * the same points. Guarantees every returned pair is at least
 * `minSeparation(canvas)` apart and inside the padded canvas.
 */
export function layoutGraph(
  graph: GraphPayload,
  chromosomeId: number,
  canvas: CanvasSpec = DEFAULT_CANVAS,
): Point[] {
  const n = graph.nodes.length;
  if (n === 0) throw new EmptyGraphError();
  if (n === 1) return [{ x: canvas.width / 2, y: canvas.height / 2 }];

  const padding = canvas.padding ?? Math.min(canvas.width, canvas.height) * 0.1;
  const rng = seededRng(chromosomeId);
  const edges: Array<[number, number]> = graph.edges.map((e) => [e.a, e.b]);

  const abstract = fruchtermanReingold(n, edges, rng);
  const pts = fitToCanvas(abstract, canvas, padding);

  const floor = minSeparation(canvas);
  const lo = { x: padding, y: padding };
  const hi = { x: canvas.width - padding, y: canvas.height - padding };
  if (separate(pts, floor, lo, hi, rng)) return pts;
  return gridFallback(n, floor, lo, hi);
}
