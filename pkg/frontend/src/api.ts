import type {
  AnomaliesResponse,
  ReportResponse,
  ScenarioEntry,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export interface ClientOptions {
  /** Service origin, e.g. "http://127.0.0.1:8000". The only setting. */
  baseUrl: string;
  /** Injectable transport for tests; defaults to the global fetch. */
  fetchFn?: typeof fetch;
}

/** Failure talking to the service: HTTP error status or no connection. */
export class ApiError extends Error {
  constructor(
    message: string,
    readonly status?: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function isAbort(error: unknown): boolean {
  // DOMException does not extend Error in every runtime; match by name.
  return (
    typeof error === "object" &&
    error !== null &&
    (error as { name?: unknown }).name === "AbortError"
  );
}

export class ExplorerClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.fetchFn = options.fetchFn ?? fetch;
  }

  /** URL serving the stored PNG for a ranked anomaly. */
  imageUrl(id: string, session?: string): string {
    const suffix = session ? `?session=${encodeURIComponent(session)}` : "";
    return `${this.baseUrl}/api/v1/image/${encodeURIComponent(id)}${suffix}`;
  }

  scenarios(): Promise<ScenarioEntry[]> {
    return this.request<ScenarioEntry[]>("/api/v1/scenarios");
  }

  anomalies(top: number, session?: string): Promise<AnomaliesResponse> {
    const params = new URLSearchParams({ top: String(top) });
    if (session) params.set("session", session);
    return this.request<AnomaliesResponse>(`/api/v1/anomalies?${params}`);
  }

  whatif(request: WhatIfRequest, signal?: AbortSignal): Promise<WhatIfResponse> {
    return this.request<WhatIfResponse>("/api/v1/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
  }

  report(): Promise<ReportResponse> {
    return this.request<ReportResponse>("/api/v1/report");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (error) {
      if (isAbort(error)) throw error; // cancellation is not a failure
      const reason = error instanceof Error ? error.message : String(error);
      throw new ApiError(`service unreachable: ${reason}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body && body.detail !== undefined) detail = JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(`HTTP ${response.status}: ${detail}`, response.status);
    }
    return (await response.json()) as T;
  }
}
