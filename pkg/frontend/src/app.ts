/**
 * Session wiring: load a table, ask questions as they occur, tweak k/tau,
 * and browse the append-only question history.
 */

import { ApiClient, AskSession } from "./api";
import { renderHeatmapView } from "./heatmapView";
import type { AskResponse, TableRecord } from "./types";
import type { ColorScale } from "./colors";

interface HistoryEntry {
  question: string;
  response: AskResponse;
}

export class App {
  private table: TableRecord | null = null;
  private readonly history: HistoryEntry[] = [];
  private readonly session: AskSession;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {
    this.session = new AskSession(client);
  }

  private el<K extends keyof HTMLElementTagNameMap>(selector: string): HTMLElementTagNameMap[K] {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as HTMLElementTagNameMap[K];
  }

  async start(): Promise<void> {
    await this.refreshTableList();
    this.el<"form">("#ask-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.ask();
    });
    this.el<"select">("#table-pick").addEventListener("change", () => void this.pickTable());
    this.el<"input">("#control-k").addEventListener("change", () => void this.ask());
    this.el<"input">("#control-tau").addEventListener("change", () => void this.ask());
    this.el<"button">("#upload").addEventListener("click", () => void this.upload());
  }

  private async refreshTableList(): Promise<void> {
    const { tables } = await this.client.listTables();
    const pick = this.el<"select">("#table-pick");
    pick.replaceChildren();
    for (const id of tables) {
      const option = this.root.ownerDocument.createElement("option");
      option.value = id;
      option.textContent = id;
      pick.appendChild(option);
    }
    if (tables.length) {
      pick.value = this.table?.id ?? tables[0];
      await this.pickTable();
    }
  }

  private async pickTable(): Promise<void> {
    const id = this.el<"select">("#table-pick").value;
    if (!id) return;
    this.table = await this.client.getTable(id);
    this.el<"div">("#status").textContent =
      `table ${id}: ${this.table.rows.length} rows x ${this.table.header.length} columns`;
  }

  private async upload(): Promise<void> {
    const raw = this.el<"textarea">("#table-json").value;
    try {
      const record = JSON.parse(raw) as TableRecord;
      await this.client.uploadTable(record);
      await this.refreshTableList();
      this.el<"select">("#table-pick").value = record.id;
      await this.pickTable();
    } catch (err) {
      this.el<"div">("#status").textContent = `upload failed: ${(err as Error).message}`;
    }
  }

  private async ask(): Promise<void> {
    if (!this.table) return;
    const question = this.el<"input">("#question").value.trim();
    if (!question) return;
    const k = Number(this.el<"input">("#control-k").value) || 10;
    const tau = Number(this.el<"input">("#control-tau").value);
    const scale = this.el<"select">("#control-scale").value as ColorScale;
    const status = this.el<"div">("#status");
    status.textContent = "asking...";
    try {
      const response = await this.session.ask({
        table_id: this.table.id,
        question,
        k,
        tau: Number.isFinite(tau) ? tau : undefined,
      });
      if (response === null) return; // superseded by a newer request
      this.history.push({ question, response });
      renderHeatmapView(this.el<"div">("#view"), this.table, response, { scale });
      this.renderHistory();
      status.textContent =
        `${response.agg.predicted} | mode ${response.mode}` +
        `${response.used_index ? " (cached columns)" : ""}`;
    } catch (err) {
      status.textContent = `error: ${(err as Error).message}`;
    }
  }

  private renderHistory(): void {
    const list = this.el<"ul">("#history");
    list.replaceChildren();
    for (const entry of [...this.history].reverse()) {
      const item = this.root.ownerDocument.createElement("li");
      const top = entry.response.topk[0];
      item.textContent = `${entry.question} -> (${top.row}, ${top.col}) ${top.text}`;
      list.appendChild(item);
    }
  }
}

export function mount(baseUrl: string, root: HTMLElement): App {
  const app = new App(new ApiClient(baseUrl), root);
  void app.start();
  return app;
}
