/**
 * Interactive heatmap view of one answered question.
 *
 * Every number shown comes verbatim from the service response: cell tint
 * from `heatmap.intensities`, outlines from `heatmap.argmax`, hover details
 * from `row_probs` / `col_probs` and the returned top-k scores. The view
 * never multiplies probabilities or renormalizes anything client-side.
 */

import { cellBackground, cellForeground, type ColorScale } from "./colors";
import type { AskResponse, TableRecord } from "./types";

export interface ViewOptions {
  scale?: ColorScale;
}

/** Shared number formatting so tests can assert display === response field. */
export function fmt(value: number): string {
  return Number(value).toPrecision(4);
}

function cellKey(row: number, col: number): string {
  return `${row}:${col}`;
}

export function renderHeatmapView(
  container: HTMLElement,
  table: TableRecord,
  response: AskResponse,
  options: ViewOptions = {},
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const intensities = response.heatmap.intensities;
  const m = table.rows.length;
  const n = table.header.length;
  if (
    intensities.length !== m ||
    intensities.some((row) => row.length !== n) ||
    response.row_probs.length !== m ||
    response.col_probs.length !== n
  ) {
    const banner = doc.createElement("div");
    banner.className = "hm-banner";
    banner.textContent =
      `response grid does not match table ${table.id} ` +
      `(${m}x${n} table, ${intensities.length}x${intensities[0]?.length ?? 0} heatmap)`;
    container.appendChild(banner);
    return; // no partial render on mismatch
  }

  const scale = options.scale ?? "amber";
  const allZero = intensities.every((row) => row.every((v) => v === 0));
  const [argRow, argCol] = response.heatmap.argmax;

  const scoreByCell = new Map<string, number>();
  for (const entry of response.heatmap.topk) {
    scoreByCell.set(cellKey(entry.row, entry.col), entry.score);
  }
  for (const entry of response.topk) {
    scoreByCell.set(cellKey(entry.row, entry.col), entry.score);
  }
  const contributing = new Set(
    (response.aggregation?.contributing ?? []).map(([r, c]) => cellKey(r, c)),
  );

  if (allZero) {
    const notice = doc.createElement("div");
    notice.className = "hm-notice";
    notice.textContent = "no confident cells";
    container.appendChild(notice);
  }

  const grid = doc.createElement("table");
  grid.className = "hm-grid";
  const head = doc.createElement("tr");
  head.appendChild(doc.createElement("th"));
  for (const name of table.header) {
    const th = doc.createElement("th");
    th.textContent = name;
    head.appendChild(th);
  }
  grid.appendChild(head);

  for (let i = 1; i <= m; i += 1) {
    const tr = doc.createElement("tr");
    const rowHead = doc.createElement("th");
    rowHead.textContent = String(i);
    rowHead.title = `P(row ${i}) = ${fmt(response.row_probs[i - 1])}`;
    tr.appendChild(rowHead);
    for (let j = 1; j <= n; j += 1) {
      const td = doc.createElement("td");
      td.className = "hm-cell";
      td.dataset.row = String(i);
      td.dataset.col = String(j);
      td.textContent = table.rows[i - 1][j - 1];
      const intensity = intensities[i - 1][j - 1];
      if (!allZero) {
        td.style.backgroundColor = cellBackground(intensity, scale);
        td.style.color = cellForeground(intensity);
      }
      if (i === argRow && j === argCol) {
        td.classList.add("hm-argmax");
      }
      if (contributing.has(cellKey(i, j))) {
        td.classList.add("hm-contrib");
      }
      const details = [
        `intensity = ${fmt(intensity)}`,
        `P(row ${i}) = ${fmt(response.row_probs[i - 1])}`,
        `P(col ${j}) = ${fmt(response.col_probs[j - 1])}`,
      ];
      const score = scoreByCell.get(cellKey(i, j));
      if (score !== undefined) {
        details.unshift(`score = ${fmt(score)}`);
      }
      td.title = details.join("\n");
      tr.appendChild(td);
    }
    grid.appendChild(tr);
  }
  container.appendChild(grid);

  renderAggregation(container, response);
  renderTopk(container, response);
}

function renderAggregation(container: HTMLElement, response: AskResponse): void {
  const doc = container.ownerDocument;
  const agg = response.aggregation;
  const box = doc.createElement("div");
  box.className = "hm-agg";
  const label = doc.createElement("span");
  label.className = "hm-agg-type";
  label.textContent = response.agg.predicted;
  box.appendChild(label);
  if (agg && agg.kind === "number" && agg.value !== null) {
    const badge = doc.createElement("span");
    badge.className = "hm-badge";
    badge.textContent = fmt(agg.value);
    box.appendChild(badge);
  } else if (agg && agg.kind === "unanswerable") {
    const warn = doc.createElement("span");
    warn.className = "hm-unanswerable";
    warn.textContent = agg.message ?? "unanswerable";
    box.appendChild(warn);
  }
  container.appendChild(box);
}

function renderTopk(container: HTMLElement, response: AskResponse): void {
  const doc = container.ownerDocument;
  const list = doc.createElement("ol");
  list.className = "hm-topk";
  for (const entry of response.topk) {
    const item = doc.createElement("li");
    const button = doc.createElement("button");
    button.type = "button";
    button.dataset.row = String(entry.row);
    button.dataset.col = String(entry.col);
    button.textContent = `(${entry.row}, ${entry.col}) ${entry.text} — ${fmt(entry.score)}`;
    button.addEventListener("click", () => flashCell(container, entry.row, entry.col));
    item.appendChild(button);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function flashCell(container: HTMLElement, row: number, col: number): void {
  const cell = container.querySelector<HTMLElement>(
    `td[data-row="${row}"][data-col="${col}"]`,
  );
  if (!cell) return;
  if (typeof cell.scrollIntoView === "function") {
    cell.scrollIntoView({ block: "center" });
  }
  cell.classList.add("hm-flash");
  setTimeout(() => cell.classList.remove("hm-flash"), 600);
}
