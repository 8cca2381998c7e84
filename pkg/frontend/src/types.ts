/** Payload shapes of the question-answering HTTP API. */

export interface TableRecord {
  id: string;
  header: string[];
  rows: string[][];
}

export interface HeatmapRecord {
  table_id: string;
  intensities: number[][];
  argmax: [number, number];
  topk: { row: number; col: number; score: number }[];
}

export interface TopCell {
  row: number;
  col: number;
  score: number;
  text: string;
}

export interface AggregationAnswer {
  kind: "cell_list" | "number" | "unanswerable";
  value: number | null;
  cells: { row: number; col: number; text: string }[];
  contributing?: [number, number][];
  message?: string;
}

export interface AskResponse {
  table_id: string;
  question: string;
  mode: "interaction" | "representation";
  used_index: boolean;
  agg: { predicted: string; distribution: Record<string, number> };
  topk: TopCell[];
  heatmap: HeatmapRecord;
  aggregation: AggregationAnswer | null;
  row_probs: number[];
  col_probs: number[];
  timing_ms: { encode: number; score: number; combine: number };
}

export interface AskRequest {
  table_id: string;
  question: string;
  mode?: "interaction" | "representation";
  k?: number;
  tau?: number;
}

export interface ApiError {
  code: string;
  message: string;
  field?: string;
}
