// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { fmt, renderHeatmapView } from "../src/heatmapView";
import type { AskResponse } from "../src/types";
import { countResponse, fixtureResponse, fixtureTable } from "./fixtures";

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "<div id='view'></div>";
  container = document.getElementById("view") as HTMLElement;
});

function cell(row: number, col: number): HTMLElement {
  const node = container.querySelector<HTMLElement>(`td[data-row="${row}"][data-col="${col}"]`);
  if (!node) throw new Error(`cell (${row}, ${col}) not rendered`);
  return node;
}

describe("renderHeatmapView", () => {
  it("outlines the argmax cell and tints by the response intensities", () => {
    renderHeatmapView(container, fixtureTable, fixtureResponse);
    expect(cell(1, 2).classList.contains("hm-argmax")).toBe(true);
    expect(cell(1, 1).classList.contains("hm-argmax")).toBe(false);
    expect(cell(1, 2).style.backgroundColor).not.toBe("");
    expect(cell(1, 2).textContent).toBe("3");
  });

  it("shows only response-field values, never recomputed ones", () => {
    renderHeatmapView(container, fixtureTable, fixtureResponse);
    const title = cell(1, 2).title;
    // every displayed number is the formatted response field, verbatim
    expect(title).toContain(`score = ${fmt(fixtureResponse.topk[0].score)}`);
    expect(title).toContain(`intensity = ${fmt(fixtureResponse.heatmap.intensities[0][1])}`);
    expect(title).toContain(`P(row 1) = ${fmt(fixtureResponse.row_probs[0])}`);
    expect(title).toContain(`P(col 2) = ${fmt(fixtureResponse.col_probs[1])}`);
    // a cell outside the returned top-k displays no score at all rather
    // than a locally computed product
    expect(cell(2, 1).title).not.toContain("score =");
    expect(cell(2, 1).title).toContain(`intensity = ${fmt(0.0277)}`);
  });

  it("renders the top-k list with one clickable entry per returned cell", () => {
    renderHeatmapView(container, fixtureTable, fixtureResponse);
    const buttons = container.querySelectorAll(".hm-topk button");
    expect(buttons.length).toBe(fixtureResponse.topk.length);
    (buttons[0] as HTMLButtonElement).click();
    expect(cell(1, 2).classList.contains("hm-flash")).toBe(true);
  });

  it("shows an error banner and no grid on dimension mismatch", () => {
    const bad: AskResponse = {
      ...fixtureResponse,
      heatmap: { ...fixtureResponse.heatmap, intensities: [[1.0]] },
    };
    renderHeatmapView(container, fixtureTable, bad);
    expect(container.querySelector(".hm-banner")).not.toBeNull();
    expect(container.querySelector(".hm-grid")).toBeNull();
  });

  it("renders the zero heatmap untinted with a notice", () => {
    const zero: AskResponse = {
      ...fixtureResponse,
      heatmap: {
        ...fixtureResponse.heatmap,
        intensities: [
          [0, 0],
          [0, 0],
        ],
      },
    };
    renderHeatmapView(container, fixtureTable, zero);
    expect(container.querySelector(".hm-notice")?.textContent).toBe("no confident cells");
    expect(cell(1, 1).style.backgroundColor).toBe("");
  });

  it("shows a numeric badge and highlights contributing cells for count", () => {
    renderHeatmapView(container, fixtureTable, countResponse());
    expect(container.querySelector(".hm-badge")?.textContent).toBe(fmt(3));
    const contrib = container.querySelectorAll(".hm-contrib");
    expect(contrib.length).toBe(3);
  });

  it("re-render replaces the previous view completely", () => {
    renderHeatmapView(container, fixtureTable, fixtureResponse);
    renderHeatmapView(container, fixtureTable, fixtureResponse);
    expect(container.querySelectorAll(".hm-grid").length).toBe(1);
  });
});
