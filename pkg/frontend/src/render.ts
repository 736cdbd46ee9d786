/** HTML/SVG generation. Pure string builders so they can be tested headless. */

import type { GraphNode, MoleculePayload, RunStatusView, ScaleEntry } from "./types.js";
import { CanvasSpec, DEFAULT_CANVAS, layoutGraph, Point } from "./layout.js";

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => {
    switch (c) {
      case "&":
        return "&amp;";
      case "<":
        return "&lt;";
      case ">":
        return "&gt;";
      case '"':
        return "&quot;";
      default:
        return "&#39;";
    }
  });
}

/** Atom caption, e.g. C, CH, CH3, OH2 — the same shape the genome text uses. */
export function nodeLabel(node: GraphNode): string {
  if (node.h_count <= 0) return node.element;
  if (node.h_count === 1) return `${node.element}H`;
  return `${node.element}H${node.h_count}`;
}

export interface Stroke {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

/**
 * Line segments for one bond: a single stroke for order 1, two parallel
 * strokes for a double bond, three for a triple.
 */
export function bondStrokes(a: Point, b: Point, order: number, gap = 2.6): Stroke[] {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy) || 1;
  const px = -dy / len;
  const py = dx / len;
  const offsets = order >= 3 ? [-gap, 0, gap] : order === 2 ? [-gap / 2, gap / 2] : [0];
  return offsets.map((o) => ({
    x1: a.x + px * o,
    y1: a.y + py * o,
    x2: b.x + px * o,
    y2: b.y + py * o,
  }));
}

const fmt = (v: number, places: number) => v.toFixed(places);

/** Render one molecule's structure as an inline SVG. */
export function moleculeSvg(mol: MoleculePayload, canvas: CanvasSpec = DEFAULT_CANVAS): string {
  const coords = layoutGraph(mol.graph, mol.chromosome_id, canvas);
  const parts: string[] = [];
  parts.push(
    `<svg class="molecule" viewBox="0 0 ${canvas.width} ${canvas.height}" ` +
      `width="${canvas.width}" height="${canvas.height}" role="img">`,
  );
  for (const edge of mol.graph.edges) {
    for (const s of bondStrokes(coords[edge.a], coords[edge.b], edge.order)) {
      parts.push(
        `<line class="bond" x1="${fmt(s.x1, 2)}" y1="${fmt(s.y1, 2)}" ` +
          `x2="${fmt(s.x2, 2)}" y2="${fmt(s.y2, 2)}"/>`,
      );
    }
  }
  mol.graph.nodes.forEach((node, i) => {
    const p = coords[i];
    parts.push(
      `<g class="atom atom-${escapeHtml(node.element.toLowerCase())}">` +
        `<circle cx="${fmt(p.x, 2)}" cy="${fmt(p.y, 2)}" r="10"/>` +
        `<text x="${fmt(p.x, 2)}" y="${fmt(p.y, 2)}" text-anchor="middle" ` +
        `dominant-baseline="central">${escapeHtml(nodeLabel(node))}</text></g>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

/**
 * One score button per scale entry, in server order — never any other value.
 * The first nine get a digit shortcut.
 */
export function scoreButtonsHtml(
  chromosomeId: number,
  scale: ScaleEntry[],
  chosen?: number,
): string {
  return scale
    .map((entry, i) => {
      const classes = chosen === entry.value ? "score-btn chosen" : "score-btn";
      const key = i < 9 ? ` data-key="${i + 1}"` : "";
      const hint = i < 9 ? `<kbd>${i + 1}</kbd> ` : "";
      return (
        `<button type="button" class="${classes}" data-score-btn ` +
        `data-cid="${chromosomeId}" data-value="${entry.value}"${key}>` +
        `${hint}${escapeHtml(entry.label)}</button>`
      );
    })
    .join("");
}

export interface CardOptions {
  blind?: boolean;
  canvas?: CanvasSpec;
  focused?: boolean;
}

/**
 * A molecule card: structure drawing, the data a judge needs (fitness unless
 * blind mode hides it, weight, heavy atoms, standard SMILES), score buttons.
 */
export function moleculeCard(
  mol: MoleculePayload,
  scale: ScaleEntry[],
  chosen: number | undefined,
  opts: CardOptions = {},
): string {
  const canvas = opts.canvas ?? DEFAULT_CANVAS;
  const classes = opts.focused ? "molecule-card focused" : "molecule-card";
  const stats: string[] = [];
  if (!opts.blind) {
    stats.push(`<div class="stat"><dt>fitness</dt><dd>${fmt(mol.fitness, 4)}</dd></div>`);
  }
  stats.push(`<div class="stat"><dt>weight</dt><dd>${fmt(mol.weight, 3)}</dd></div>`);
  stats.push(`<div class="stat"><dt>heavy atoms</dt><dd>${mol.heavy_atoms}</dd></div>`);
  const smiles = mol.standard_smiles === "" ? "(incomplete)" : mol.standard_smiles;
  return (
    `<div class="${classes}" data-molecule data-cid="${mol.chromosome_id}">` +
    `<div class="card-head">#${mol.chromosome_id}</div>` +
    moleculeSvg(mol, canvas) +
    `<dl class="stats">${stats.join("")}</dl>` +
    `<div class="smiles" title="${escapeHtml(mol.genome)}">${escapeHtml(smiles)}</div>` +
    `<div class="score-row">${scoreButtonsHtml(mol.chromosome_id, scale, chosen)}</div>` +
    `</div>`
  );
}

/** The whole scoring panel for one interaction generation. */
export function generationPanel(
  generation: number,
  molecules: MoleculePayload[],
  scale: ScaleEntry[],
  entries: Map<number, number>,
  opts: CardOptions & { focusIndex?: number } = {},
): string {
  const cards = molecules
    .map((mol, i) =>
      moleculeCard(mol, scale, entries.get(mol.chromosome_id), {
        ...opts,
        focused: i === opts.focusIndex,
      }),
    )
    .join("");
  return (
    `<div class="generation-panel" data-generation="${generation}">` +
    `<p class="panel-note">Generation ${generation}: ${molecules.length} molecule(s) ` +
    `awaiting judgment. Scored ${entries.size}.</p>` +
    `<div class="card-grid">${cards}</div></div>`
  );
}

export function statusLine(status: RunStatusView): string {
  const bits = [
    `<span class="state state-${status.state}">${status.state}</span>`,
    `<span>run ${status.run_id ?? "—"}</span>`,
    `<span>generation ${status.generation}</span>`,
  ];
  if (status.population_size !== null) {
    bits.push(`<span>population ${status.population_size}</span>`);
  }
  if (status.best) {
    bits.push(
      `<span>best ${fmt(status.best.fitness, 4)} ` +
        `<code>${escapeHtml(status.best.genome)}</code></span>`,
    );
  }
  if (status.reason) {
    bits.push(`<span class="reason">${escapeHtml(status.reason)}</span>`);
  }
  return bits.join(" · ");
}

const HISTORY_COLUMNS = [
  "generation",
  "chromosome_id",
  "fitness",
  "user_score",
  "weight",
  "heavy_atoms",
  "standard_smiles",
] as const;

export function historyTable(records: Array<Record<string, unknown>>): string {
  if (records.length === 0) return `<p class="panel-note">No matching records.</p>`;
  const head = HISTORY_COLUMNS.map((c) => `<th>${c}</th>`).join("");
  const rows = records
    .map((r) => {
      const cells = HISTORY_COLUMNS.map((c) => {
        const v = r[c];
        const text =
          typeof v === "number" && !Number.isInteger(v) ? v.toFixed(4) : String(v ?? "—");
        return `<td>${escapeHtml(text)}</td>`;
      }).join("");
      return `<tr>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="history"><thead><tr>${head}</tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}
