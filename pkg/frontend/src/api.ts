/** Typed client for the engine's HTTP/JSON API — the UI's only backend. */

import type { ArchiveRecordView, MoleculePayload, RunStatusView } from "./types.js";
import { ArchiveQueryParams, buildSearchParams } from "./query.js";

export class ApiError extends Error {
  readonly status: number;
  readonly errorName: string;
  readonly detail: string;

  constructor(status: number, errorName: string, detail: string) {
    super(`${errorName}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.errorName = errorName;
    this.detail = detail;
  }
}

export type ControlCommand = "pause" | "resume" | "stop" | "skip-interaction";

export interface ScoresBody {
  scores: Array<{ chromosome_id: number; value: number }>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function toApiError(resp: Response): Promise<ApiError> {
  let name = "HttpError";
  let detail = `unexpected status ${resp.status}`;
  try {
    const body: unknown = await resp.json();
    if (body && typeof body === "object" && typeof (body as { error?: unknown }).error === "string") {
      name = (body as { error: string }).error;
      detail = String((body as { detail?: unknown }).detail ?? "");
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(resp.status, name, detail);
}

export class ApiClient {
  private readonly fetchFn: FetchLike;
  private readonly base: string;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.base = base;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) throw await toApiError(resp);
    return (await resp.json()) as T;
  }

  status(): Promise<RunStatusView> {
    return this.request<RunStatusView>("/api/status");
  }

  startRun(config: unknown): Promise<{ run_id: string }> {
    return this.request<{ run_id: string }>("/api/run", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  control(command: ControlCommand): Promise<RunStatusView> {
    return this.request<RunStatusView>(`/api/control/${command}`, { method: "POST" });
  }

  molecules(
    generation: number,
    displayedOnly = false,
  ): Promise<{ generation: number; molecules: MoleculePayload[] }> {
    const suffix = displayedOnly ? "?displayed=true" : "";
    return this.request(`/api/generations/${generation}/molecules${suffix}`);
  }

  submitScores(generation: number, body: ScoresBody): Promise<{ accepted: number }> {
    return this.request<{ accepted: number }>(`/api/generations/${generation}/scores`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  search(query: ArchiveQueryParams): Promise<{ records: ArchiveRecordView[] }> {
    const params = buildSearchParams(query);
    const qs = params.toString();
    return this.request(`/api/history/search${qs ? `?${qs}` : ""}`);
  }
}
