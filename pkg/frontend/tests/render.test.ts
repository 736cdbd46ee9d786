import { describe, expect, it } from "vitest";

import {
  bondStrokes,
  generationPanel,
  historyTable,
  moleculeCard,
  moleculeSvg,
  nodeLabel,
  scoreButtonsHtml,
  statusLine,
} from "../src/render.js";
import type { ScaleEntry } from "../src/types.js";
import {
  CYCLOPROPANE,
  DEFAULT_SCALE,
  ETHANE,
  FORMALDEHYDE,
  makeMol,
} from "./helpers.js";

const count = (haystack: string, needle: string) => haystack.split(needle).length - 1;

describe("nodeLabel", () => {
  it("shows element plus hydrogen count", () => {
    expect(nodeLabel({ element: "C", h_count: 0 })).toBe("C");
    expect(nodeLabel({ element: "C", h_count: 1 })).toBe("CH");
    expect(nodeLabel({ element: "C", h_count: 3 })).toBe("CH3");
    expect(nodeLabel({ element: "O", h_count: 2 })).toBe("OH2");
  });
});

describe("bondStrokes", () => {
  const a = { x: 0, y: 0 };
  const b = { x: 10, y: 0 };

  it("draws one stroke for a single bond", () => {
    const strokes = bondStrokes(a, b, 1);
    expect(strokes).toEqual([{ x1: 0, y1: 0, x2: 10, y2: 0 }]);
  });

  it("draws two parallel strokes for a double bond", () => {
    const strokes = bondStrokes(a, b, 2, 4);
    expect(strokes).toHaveLength(2);
    for (const s of strokes) {
      expect(s.y1).toBeCloseTo(s.y2, 10); // parallel to the bond axis
      expect(Math.abs(s.x2 - s.x1)).toBeCloseTo(10, 10);
    }
    const offsets = strokes.map((s) => s.y1).sort((x, y) => x - y);
    expect(offsets[0]).toBeCloseTo(-2, 10);
    expect(offsets[1]).toBeCloseTo(2, 10);
  });

  it("draws three strokes for a triple bond, one through the centerline", () => {
    const strokes = bondStrokes(a, b, 3, 4);
    expect(strokes).toHaveLength(3);
    const offsets = strokes.map((s) => s.y1).sort((x, y) => x - y);
    expect(offsets).toEqual([-4, 0, 4]);
  });
});

describe("moleculeSvg", () => {
  it("renders ethane as two labeled nodes joined by one stroke", () => {
    const svg = moleculeSvg(makeMol(1, ETHANE));
    expect(count(svg, 'class="bond"')).toBe(1);
    expect(count(svg, ">CH3</text>")).toBe(2);
  });

  it("renders a double bond as two parallel strokes", () => {
    const svg = moleculeSvg(makeMol(2, FORMALDEHYDE));
    expect(count(svg, 'class="bond"')).toBe(2);
    expect(count(svg, ">CH2</text>")).toBe(1);
    expect(count(svg, ">O</text>")).toBe(1);
  });

  it("renders cyclopropane as a visible three-edge cycle", () => {
    const svg = moleculeSvg(makeMol(3, CYCLOPROPANE));
    expect(count(svg, 'class="bond"')).toBe(3);
    expect(count(svg, '<g class="atom')).toBe(3);
  });
});

describe("scoreButtonsHtml", () => {
  const extract = (html: string) =>
    [...html.matchAll(/data-value="([^"]+)"/g)].map((m) => Number(m[1]));

  it("offers exactly the server's scale, in order", () => {
    const html = scoreButtonsHtml(9, DEFAULT_SCALE);
    expect(extract(html)).toEqual([1.0, 0.75, 0.5, 0.25, 0.0]);
    expect(count(html, "<button")).toBe(DEFAULT_SCALE.length);
    for (const entry of DEFAULT_SCALE) {
      expect(html).toContain(`${entry.label}</button>`);
    }
  });

  it("never invents options beyond a custom scale", () => {
    const scale: ScaleEntry[] = [
      { label: "yes", value: 1.0 },
      { label: "maybe", value: 0.6 },
      { label: "no", value: 0.1 },
    ];
    const html = scoreButtonsHtml(4, scale);
    expect(extract(html)).toEqual([1.0, 0.6, 0.1]);
    expect(html).not.toContain("0.75");
  });

  it("marks the chosen value", () => {
    const html = scoreButtonsHtml(4, DEFAULT_SCALE, 0.75);
    expect(count(html, "chosen")).toBe(1);
    expect(html).toMatch(/chosen[^>]*data-value="0.75"/);
  });

  it("assigns digit shortcuts to the first buttons", () => {
    const html = scoreButtonsHtml(4, DEFAULT_SCALE);
    expect(html).toContain('data-key="1"');
    expect(html).toContain('data-key="5"');
    expect(html).toContain("<kbd>1</kbd>");
  });
});

describe("moleculeCard", () => {
  const mol = makeMol(17, ETHANE, { fitness: 0.7321, weight: 30.07, heavy_atoms: 2 });

  it("shows fitness, weight, and heavy atom count", () => {
    const card = moleculeCard(mol, DEFAULT_SCALE, undefined);
    expect(card).toContain("0.7321");
    expect(card).toContain("30.070");
    expect(card).toContain("heavy atoms");
    expect(card).toContain("<dd>2</dd>");
    expect(card).toContain('data-cid="17"');
  });

  it("hides fitness in blind mode but keeps the other data", () => {
    const card = moleculeCard(mol, DEFAULT_SCALE, undefined, { blind: true });
    expect(card).not.toContain("fitness");
    expect(card).not.toContain("0.7321");
    expect(card).toContain("30.070");
    expect(card).toContain("heavy atoms");
  });
});

describe("generationPanel", () => {
  it("renders a 50-molecule generation without dropping entries", () => {
    const molecules = Array.from({ length: 50 }, (_, i) => makeMol(i * 3 + 1, ETHANE));
    const html = generationPanel(4, molecules, DEFAULT_SCALE, new Map());
    expect(count(html, "data-molecule")).toBe(50);
    expect(count(html, "<svg")).toBe(50);
    for (const mol of molecules) {
      expect(html).toContain(`data-cid="${mol.chromosome_id}"`);
    }
  });

  it("reflects already-chosen scores", () => {
    const molecules = [makeMol(1, ETHANE), makeMol(2, ETHANE)];
    const entries = new Map([[2, 0.25]]);
    const html = generationPanel(0, molecules, DEFAULT_SCALE, entries);
    expect(count(html, "chosen")).toBe(1);
    expect(html).toContain("Scored 1.");
  });
});

describe("status and history rendering", () => {
  it("summarizes a run status", () => {
    const html = statusLine({
      run_id: "run-abc",
      state: "awaiting-scores",
      generation: 4,
      population_size: 20,
      best: { genome: "[CH3]-[OH]", fitness: 0.8123 },
    });
    expect(html).toContain("awaiting-scores");
    expect(html).toContain("run-abc");
    expect(html).toContain("0.8123");
  });

  it("tabulates archive records", () => {
    const html = historyTable([
      {
        run_id: "r",
        generation: 1,
        chromosome_id: 5,
        genome: "[CH4]",
        standard_smiles: "C",
        fitness: 0.25,
        user_score: null,
        heavy_atoms: 1,
        weight: 16.043,
        parent_ids: [],
        op_log: ["genesis"],
      },
    ]);
    expect(count(html, "<tr>")).toBe(2); // header + one row
    expect(html).toContain("<td>0.2500</td>");
  });

  it("says so when nothing matches", () => {
    expect(historyTable([])).toContain("No matching records");
  });
});
