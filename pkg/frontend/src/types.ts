/**
 * Wire types for the datafactory gateway.
 *
 * These mirror the JSON the HTTP endpoints and the SSE stream produce;
 * the UI never talks to the engine except through these shapes.
 */

export type EventKind =
  | 'thought'
  | 'action'
  | 'observation'
  | 'final'
  | 'error'
  | 'chart'
  | 'subgraph';

export const EVENT_KINDS: readonly EventKind[] = [
  'thought',
  'action',
  'observation',
  'final',
  'error',
  'chart',
  'subgraph',
];

export interface TraceEvent {
  session_id: string;
  seq: number;
  kind: EventKind;
  payload: Record<string, unknown>;
}

export type CellValue = string | number | boolean | null;

// ── Event payloads ───────────────────────────────────────────────────────

export interface ThoughtPayload {
  text: string;
}

export interface ActionPayload {
  action: string;
  input: string;
}

export interface ObservationPayload {
  text: string;
}

export interface FinalPayload {
  answer: string;
  final_kind: string;
  steps?: number;
  team_call_counts?: Record<string, number>;
  usage?: { input_tokens: number; output_tokens: number };
  query?: string;
}

export interface ErrorPayload {
  type: string;
  message: string;
}

export type ChartKind = 'bar' | 'line' | 'pie' | 'scatter';

export interface ChartSpec {
  kind: ChartKind;
  x: string;
  y: string;
  title?: string;
  series?: string | null;
}

export interface ResultTable {
  columns: string[];
  rows: CellValue[][];
}

export interface ChartPayload {
  spec: ChartSpec;
  columns: string[];
  rows: CellValue[][];
}

export interface SubgraphNode {
  id: string;
  type: string;
  attrs: Record<string, CellValue | CellValue[]>;
  highlighted: boolean;
}

export interface SubgraphEdge {
  source: string;
  target: string;
  rel_type: string;
  highlighted: boolean;
}

export interface SubgraphView {
  nodes: SubgraphNode[];
  edges: SubgraphEdge[];
}

// ── Endpoint responses ───────────────────────────────────────────────────

export interface IngestResult {
  table: string;
  columns: string[];
  rows: number;
  dropped_rows: number;
  warnings: string[];
}

export interface KgBuildResult {
  entities: number;
  relationships: number;
  entity_types: string[];
  rel_types: string[];
}

export type AskMode = 'leader' | 'database' | 'knowledge_graph';

export interface SessionLog {
  session_id: string;
  mode: string;
  done: boolean;
  events: TraceEvent[];
}

export interface GraphSchemaInfo {
  labels: string[];
  rel_types: string[];
  property_keys: Record<string, string[]>;
  text: string;
}

export interface QueryResult {
  columns: string[];
  rows: CellValue[][];
}
