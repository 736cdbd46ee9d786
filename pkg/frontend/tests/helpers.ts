import type { GraphPayload, MoleculePayload, ScaleEntry } from "../src/types.js";

export function makeMol(
  id: number,
  graph: GraphPayload,
  over: Partial<MoleculePayload> = {},
): MoleculePayload {
  return {
    chromosome_id: id,
    genome: "[CH4]",
    standard_smiles: "C",
    fitness: 0.5,
    user_score: null,
    heavy_atoms: graph.nodes.length,
    weight: 16.043,
    graph,
    ...over,
  };
}

export const METHANE: GraphPayload = {
  nodes: [{ element: "C", h_count: 4 }],
  edges: [],
};

export const ETHANE: GraphPayload = {
  nodes: [
    { element: "C", h_count: 3 },
    { element: "C", h_count: 3 },
  ],
  edges: [{ a: 0, b: 1, order: 1 }],
};

export const FORMALDEHYDE: GraphPayload = {
  nodes: [
    { element: "C", h_count: 2 },
    { element: "O", h_count: 0 },
  ],
  edges: [{ a: 0, b: 1, order: 2 }],
};

export const CYCLOPROPANE: GraphPayload = {
  nodes: [
    { element: "C", h_count: 2 },
    { element: "C", h_count: 2 },
    { element: "C", h_count: 2 },
  ],
  edges: [
    { a: 0, b: 1, order: 1 },
    { a: 1, b: 2, order: 1 },
    { a: 2, b: 0, order: 1 },
  ],
};

export const DEFAULT_SCALE: ScaleEntry[] = [
  { label: "Excellent", value: 1.0 },
  { label: "Good", value: 0.75 },
  { label: "Average", value: 0.5 },
  { label: "Poor", value: 0.25 },
  { label: "Dreadful", value: 0.0 },
];

/** Small seeded rng so property-style tests are reproducible. */
export function testRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
