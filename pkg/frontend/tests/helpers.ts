import fixtureJson from "./fixtures/interaction.json";
import type {
  AnomaliesResponse,
  ScenarioEntry,
  WhatIfRequest,
  WhatIfResponse,
} from "../src/types.js";

export interface WhatIfExchange {
  request: WhatIfRequest;
  response: WhatIfResponse;
}

export interface Fixture {
  scenarios: ScenarioEntry[];
  anomalies: AnomaliesResponse;
  whatif: WhatIfExchange[];
  report: { rows: Array<Record<string, unknown>> };
  empty_anomalies: AnomaliesResponse;
}

/** Responses captured from the real HTTP service over a seeded bundle. */
export const fixture = fixtureJson as unknown as Fixture;

export function jsonResponse(data: unknown, status = 200): Response {
  return {
    ok: status < 400,
    status,
    statusText: `status ${status}`,
    json: async () => data,
  } as unknown as Response;
}

export interface FixtureServer {
  fetchFn: typeof fetch;
  /** "METHOD /path" of every request, in arrival order. */
  log: string[];
}

/** A fetch double that answers exactly like the captured service. */
export function fixtureServer(
  overrides: { anomalies?: AnomaliesResponse } = {},
): FixtureServer {
  const log: string[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input));
    const method = init?.method ?? "GET";
    log.push(`${method} ${url.pathname}${url.search}`);
    if (method === "GET" && url.pathname === "/api/v1/scenarios") {
      return jsonResponse(fixture.scenarios);
    }
    if (method === "GET" && url.pathname === "/api/v1/anomalies") {
      return jsonResponse(overrides.anomalies ?? fixture.anomalies);
    }
    if (method === "GET" && url.pathname === "/api/v1/report") {
      return jsonResponse(fixture.report);
    }
    if (method === "POST" && url.pathname === "/api/v1/whatif") {
      const body = JSON.parse(String(init?.body)) as WhatIfRequest;
      const match = fixture.whatif.find(
        (exchange) =>
          exchange.request.id === body.id &&
          exchange.request.alpha === body.alpha &&
          exchange.request.k === body.k,
      );
      if (!match) {
        return jsonResponse({ detail: "no fixture for this query" }, 404);
      }
      return jsonResponse(match.response);
    }
    return jsonResponse({ detail: `unexpected ${method} ${url.pathname}` }, 500);
  }) as unknown as typeof fetch;
  return { fetchFn, log };
}

export function abortError(): Error {
  return new DOMException("the request was aborted", "AbortError");
}
