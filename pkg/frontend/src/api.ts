// Thin client for the acquisition service; every UI action is exactly one of
// these documented calls.

import { PlanDocument, SessionView } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string | string[],
  ) {
    super(Array.isArray(detail) ? detail.join("; ") : detail);
  }
}

async function parseFailure(response: Response): Promise<never> {
  let detail: string | string[] = response.statusText;
  try {
    const body = await response.json();
    if (body && body.detail !== undefined) detail = body.detail;
  } catch {
    // keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) await parseFailure(response);
    return response.json();
  }

  async submitPlan(doc: PlanDocument): Promise<{ id: string; state: string }> {
    return this.request("/api/plans", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    }) as Promise<{ id: string; state: string }>;
  }

  async start(sessionId: string): Promise<{ state: string }> {
    return this.request(`/api/sessions/${sessionId}/start`, { method: "POST" }) as Promise<{
      state: string;
    }>;
  }

  async stop(sessionId: string): Promise<{ state: string }> {
    return this.request(`/api/sessions/${sessionId}/stop`, { method: "POST" }) as Promise<{
      state: string;
    }>;
  }

  async getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/api/sessions/${sessionId}`) as Promise<SessionView>;
  }

  streamUrl(sessionId: string, modalities?: string[]): string {
    const query = modalities && modalities.length ? `?modalities=${modalities.join(",")}` : "";
    return `${this.baseUrl}/api/sessions/${sessionId}/stream${query}`;
  }

  exportUrl(sessionId: string, format: "csv" | "s2p" | "snapshot"): string {
    return `${this.baseUrl}/api/sessions/${sessionId}/export?format=${format}`;
  }
}
