/** HTTP client with newest-wins handling for overlapping /ask requests. */

import type { AskRequest, AskResponse, TableRecord } from "./types";

export class ApiClient {
  constructor(private readonly baseUrl: string, private readonly fetchFn: typeof fetch = fetch) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      const message = body && body.message ? body.message : `HTTP ${response.status}`;
      throw new Error(message);
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  listTables(): Promise<{ tables: string[] }> {
    return this.request("/tables");
  }

  getTable(id: string): Promise<TableRecord> {
    return this.request(`/tables/${encodeURIComponent(id)}`);
  }

  uploadTable(record: TableRecord): Promise<{ id: string }> {
    return this.request("/tables", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
  }

  ask(payload: AskRequest): Promise<AskResponse> {
    return this.request("/ask", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }
}

/**
 * Serializes overlapping asks: every call gets a sequence number and only
 * the latest call's response is delivered. Responses that arrive after a
 * newer request was issued resolve to null and must not be rendered.
 */
export class AskSession {
  private latest = 0;

  constructor(private readonly client: Pick<ApiClient, "ask">) {}

  async ask(payload: AskRequest): Promise<AskResponse | null> {
    const ticket = ++this.latest;
    const response = await this.client.ask(payload);
    return ticket === this.latest ? response : null;
  }
}
