import type { CardState, ExplorerState } from "./state.js";
import type { WhatIfResponse } from "./types.js";

/** Callbacks the rendered controls invoke; also the image URL builder so
 * the DOM stays a pure function of (state, handlers). */
export interface Handlers {
  imageUrl(id: string): string;
  onRetry(): void;
  onOpen(id: string): void;
  onAlpha(alpha: number): void;
  onConcept(k: number): void;
}

const SCORE_DIGITS = 4;

function fmt(value: number): string {
  return value.toFixed(SCORE_DIGITS);
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderGallery(
  state: ExplorerState,
  handlers: Handlers,
  doc: Document,
): HTMLElement {
  const list = el(doc, "ul", "gallery");
  for (const item of state.items) {
    const tile = el(doc, "li", "tile");
    tile.dataset.id = item.id;
    tile.dataset.rank = String(item.rank);
    const button = el(doc, "button");
    button.type = "button";
    button.addEventListener("click", () => handlers.onOpen(item.id));
    const img = el(doc, "img");
    img.src = handlers.imageUrl(item.id);
    img.alt = item.id;
    button.append(
      img,
      el(doc, "span", "rank", `#${item.rank}`),
      el(doc, "span", "id", item.id),
      el(doc, "span", "score", fmt(item.score)),
    );
    tile.append(button);
    list.append(tile);
  }
  return list;
}

function renderConceptSlot(
  card: CardState,
  k: number,
  answer: WhatIfResponse | undefined,
  doc: Document,
): HTMLElement {
  const slot = el(doc, "figure", "ce");
  slot.dataset.k = String(k);
  // Show only answers for the alpha currently selected; anything older
  // belongs to a different condition and would mislead.
  if (answer && answer.condition.alpha === card.snappedAlpha) {
    const img = el(doc, "img");
    img.src = `data:image/png;base64,${answer.image}`;
    img.alt = `counterfactual of ${card.id} along concept ${k}`;
    const caption = el(doc, "figcaption");
    caption.append(
      el(doc, "span", "score-after", fmt(answer.score_after)),
      el(doc, "span", "l1-badge", `L1 ${fmt(answer.l1_change)}`),
    );
    slot.append(img, caption);
  } else {
    slot.append(
      el(doc, "p", "placeholder", `concept ${k}: no answer at this α yet`),
    );
  }
  return slot;
}

function renderCard(
  state: ExplorerState,
  card: CardState,
  handlers: Handlers,
  doc: Document,
): HTMLElement {
  const section = el(doc, "section", "card");
  section.dataset.id = card.id;

  const original = el(doc, "figure", "original");
  const img = el(doc, "img");
  img.src = handlers.imageUrl(card.id);
  img.alt = card.id;
  original.append(
    img,
    el(doc, "figcaption", "score-before", fmt(card.score)),
  );

  const controls = el(doc, "div", "controls");
  const slider = el(doc, "input", "alpha");
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.01";
  slider.value = String(card.alpha);
  slider.addEventListener("change", () =>
    handlers.onAlpha(Number(slider.value)),
  );
  const sliderLabel = el(
    doc,
    "output",
    "alpha-value",
    card.snappedAlpha === null
      ? `α = ${card.alpha}`
      : `α = ${card.snappedAlpha} (snapped)`,
  );
  controls.append(slider, sliderLabel);
  for (let k = 0; k < state.nConcepts; k += 1) {
    const button = el(doc, "button", "concept", `concept ${k}`);
    button.type = "button";
    button.dataset.k = String(k);
    button.setAttribute("aria-pressed", String(k === card.k));
    button.addEventListener("click", () => handlers.onConcept(k));
    controls.append(button);
  }

  const slots = el(doc, "div", "counterfactuals");
  for (let k = 0; k < state.nConcepts; k += 1) {
    slots.append(renderConceptSlot(card, k, card.latest[k], doc));
  }

  const history = el(doc, "ol", "history");
  for (const record of card.history) {
    history.append(
      el(
        doc,
        "li",
        undefined,
        `α=${record.response.condition.alpha} k=${record.k} ` +
          `score ${fmt(record.response.score_before)} → ` +
          `${fmt(record.response.score_after)}`,
      ),
    );
  }

  section.append(original, controls);
  if (card.pending) {
    section.append(
      el(
        doc,
        "p",
        "pending",
        `querying α=${card.pending.alpha} k=${card.pending.k}…`,
      ),
    );
  }
  if (card.error) {
    section.append(el(doc, "p", "card-error", card.error));
  }
  section.append(slots, history);
  return section;
}

/** Build the whole UI for a state. Same state, same handlers => same DOM. */
export function renderApp(
  state: ExplorerState,
  handlers: Handlers,
  doc: Document,
): HTMLElement {
  const root = el(doc, "div", "explorer");
  switch (state.phase) {
    case "loading":
      root.append(el(doc, "p", "status", "loading…"));
      break;
    case "error": {
      const box = el(doc, "div", "error");
      box.append(el(doc, "p", undefined, state.error ?? "request failed"));
      const retry = el(doc, "button", "retry", "retry");
      retry.type = "button";
      retry.addEventListener("click", () => handlers.onRetry());
      box.append(retry);
      root.append(box);
      break;
    }
    case "empty":
      root.append(
        el(
          doc,
          "p",
          "empty",
          "no trained sessions found — point the service at a " +
            "directory of run bundles",
        ),
      );
      break;
    case "ready": {
      root.append(renderGallery(state, handlers, doc));
      if (state.card) {
        root.append(renderCard(state, state.card, handlers, doc));
      }
      break;
    }
  }
  return root;
}
