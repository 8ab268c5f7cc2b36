import type { AnomaliesResponse, AnomalyItem, WhatIfResponse } from "./types.js";

/** One answered what-if query, in issue order. */
export interface QueryRecord {
  alpha: number;
  k: number;
  response: WhatIfResponse;
}

export interface CardState {
  id: string;
  /** Detector score of the original, as ranked by the server. */
  score: number;
  /** Current slider value; snaps to the server grid after each answer. */
  alpha: number;
  /** Currently selected concept. */
  k: number;
  /** Grid value the server last snapped to, null before the first answer. */
  snappedAlpha: number | null;
  /** Latest answer per concept (render filters to the current alpha). */
  latest: Record<number, WhatIfResponse>;
  history: QueryRecord[];
  pending: { alpha: number; k: number } | null;
  error: string | null;
}

export type GalleryPhase = "loading" | "ready" | "empty" | "error";

export interface ExplorerState {
  phase: GalleryPhase;
  error: string | null;
  session: string | null;
  nConcepts: number;
  items: AnomalyItem[];
  card: CardState | null;
}

export const initialState: ExplorerState = {
  phase: "loading",
  error: null,
  session: null,
  nConcepts: 2,
  items: [],
  card: null,
};

export type Action =
  | { type: "gallery-loading" }
  | { type: "gallery-loaded"; response: AnomaliesResponse; nConcepts: number }
  | { type: "gallery-failed"; message: string }
  | { type: "card-opened"; item: AnomalyItem }
  | { type: "card-closed" }
  | { type: "whatif-started"; alpha: number; k: number }
  | { type: "whatif-resolved"; record: QueryRecord }
  | { type: "whatif-failed"; message: string };

function freshCard(item: AnomalyItem): CardState {
  return {
    id: item.id,
    score: item.score,
    alpha: 1.0,
    k: 0,
    snappedAlpha: null,
    latest: {},
    history: [],
    pending: null,
    error: null,
  };
}

/** Pure transition: every branch returns a new state object. */
export function reduce(state: ExplorerState, action: Action): ExplorerState {
  switch (action.type) {
    case "gallery-loading":
      return { ...state, phase: "loading", error: null };
    case "gallery-loaded": {
      const empty = action.response.items.length === 0;
      return {
        ...state,
        phase: empty ? "empty" : "ready",
        error: null,
        session: action.response.session,
        nConcepts: action.nConcepts,
        items: action.response.items,
        card: null,
      };
    }
    case "gallery-failed":
      return { ...state, phase: "error", error: action.message };
    case "card-opened":
      return { ...state, card: freshCard(action.item) };
    case "card-closed":
      return { ...state, card: null };
    case "whatif-started": {
      if (!state.card) return state;
      return {
        ...state,
        card: {
          ...state.card,
          alpha: action.alpha,
          k: action.k,
          pending: { alpha: action.alpha, k: action.k },
          error: null,
        },
      };
    }
    case "whatif-resolved": {
      if (!state.card) return state;
      const snapped = action.record.response.condition.alpha;
      return {
        ...state,
        card: {
          ...state.card,
          alpha: snapped,
          k: action.record.k,
          snappedAlpha: snapped,
          latest: { ...state.card.latest, [action.record.k]: action.record.response },
          history: [...state.card.history, action.record],
          pending: null,
          error: null,
        },
      };
    }
    case "whatif-failed": {
      if (!state.card) return state;
      return {
        ...state,
        card: { ...state.card, pending: null, error: action.message },
      };
    }
  }
}
