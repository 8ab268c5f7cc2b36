export { ApiError, ExplorerClient, type ClientOptions } from "./api.js";
export {
  createExplorer,
  Explorer,
  type ExplorerOptions,
} from "./controller.js";
export { renderApp, type Handlers } from "./render.js";
export {
  initialState,
  reduce,
  type Action,
  type CardState,
  type ExplorerState,
  type GalleryPhase,
  type QueryRecord,
} from "./state.js";
export type {
  AnomaliesResponse,
  AnomalyItem,
  Condition,
  ReportResponse,
  ScenarioEntry,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";
