/** Shapes of the JSON the engine serves. Field names mirror the wire format. */

export interface GraphNode {
  element: string;
  h_count: number;
}

export interface GraphEdge {
  a: number;
  b: number;
  order: number;
}

export interface GraphPayload {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface MoleculePayload {
  chromosome_id: number;
  genome: string;
  standard_smiles: string;
  fitness: number;
  user_score: number | null;
  heavy_atoms: number;
  weight: number;
  graph: GraphPayload;
}

export interface ScaleEntry {
  label: string;
  value: number;
}

export interface AwaitingInfo {
  generation: number;
  displayed: number[];
  scale: ScaleEntry[];
}

export type RunState =
  | "idle"
  | "running"
  | "awaiting-scores"
  | "finished"
  | "failed";

export interface RunStatusView {
  run_id: string | null;
  state: RunState;
  generation: number;
  population_size: number | null;
  best: { genome: string; fitness: number } | null;
  reason?: string;
  awaiting?: AwaitingInfo;
}

export interface ArchiveRecordView {
  run_id: string;
  generation: number;
  chromosome_id: number;
  genome: string;
  standard_smiles: string;
  fitness: number;
  user_score: number | null;
  heavy_atoms: number;
  weight: number;
  parent_ids: number[];
  op_log: string[];
}
