/** JSON shapes served by the what-if service under /api/v1. */

export interface ScenarioEntry {
  session: string;
  scenario: Record<string, unknown>;
  kind: string;
  seed: number;
  scale: string;
  n_concepts: number;
  alpha_grid: number[];
  n_anomalies: number;
  metrics: Record<string, unknown> | null;
}

export interface AnomalyItem {
  rank: number;
  id: string;
  score: number;
}

export interface AnomaliesResponse {
  session: string | null;
  items: AnomalyItem[];
}

export interface WhatIfRequest {
  id: string;
  alpha: number;
  k: number;
  session?: string;
}

/** The condition the server actually applied (alpha snapped to its grid). */
export interface Condition {
  alpha_level: number;
  alpha: number;
  k: number;
}

export interface WhatIfResponse {
  id: string;
  session: string;
  alpha: number;
  k: number;
  condition: Condition;
  /** Counterfactual image as base64-encoded PNG bytes. */
  image: string;
  score_before: number;
  score_after: number;
  l1_change: number;
}

export interface ReportResponse {
  rows: Array<Record<string, unknown>>;
}
