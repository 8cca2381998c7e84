import type { AskResponse, TableRecord } from "../src/types";

export const fixtureTable: TableRecord = {
  id: "fix",
  header: ["name", "score"],
  rows: [
    ["alice", "3"],
    ["bob", "5"],
  ],
};

/** Mirrors a real service response for the 2x2 fixture (gold cell (1, 2)). */
export const fixtureResponse: AskResponse = {
  table_id: "fix",
  question: "what is the score of alice ?",
  mode: "interaction",
  used_index: false,
  agg: {
    predicted: "lookup",
    distribution: { lookup: 0.9, max: 0.02, min: 0.02, count: 0.02, sum: 0.02, average: 0.02 },
  },
  topk: [
    { row: 1, col: 2, score: 0.72, text: "3" },
    { row: 1, col: 1, score: 0.18, text: "alice" },
  ],
  heatmap: {
    table_id: "fix",
    intensities: [
      [0.25, 1.0],
      [0.0277, 0.111],
    ],
    argmax: [1, 2],
    topk: [
      { row: 1, col: 2, score: 0.72 },
      { row: 1, col: 1, score: 0.18 },
    ],
  },
  aggregation: {
    kind: "cell_list",
    value: null,
    cells: [{ row: 1, col: 2, text: "3" }],
    contributing: [[1, 2]],
  },
  row_probs: [0.9, 0.1],
  col_probs: [0.2, 0.8],
  timing_ms: { encode: 0.5, score: 4.0, combine: 0.3 },
};

export function countResponse(): AskResponse {
  return {
    ...fixtureResponse,
    agg: { ...fixtureResponse.agg, predicted: "count" },
    aggregation: {
      kind: "number",
      value: 3,
      cells: [],
      contributing: [
        [1, 1],
        [1, 2],
        [2, 2],
      ],
    },
  };
}
