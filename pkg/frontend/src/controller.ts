import { ApiError, ExplorerClient } from "./api.js";
import { initialState, reduce, type Action, type ExplorerState } from "./state.js";
import { renderApp, type Handlers } from "./render.js";

export interface ExplorerOptions {
  baseUrl: string;
  mount: HTMLElement;
  /** How many ranked anomalies the gallery requests. */
  top?: number;
  session?: string;
  fetchFn?: typeof fetch;
}

function message(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return error.message;
  return String(error);
}

/** Wires the API client, the pure reducer, and the pure renderer.
 *
 * All mutation happens here: dispatch folds an action into the state and
 * re-renders the mount. At most one what-if request is in flight per
 * card; issuing a new one aborts the old.
 */
export class Explorer {
  private readonly client: ExplorerClient;
  private readonly mount: HTMLElement;
  private readonly top: number;
  private readonly session?: string;
  private stateValue: ExplorerState = initialState;
  private inflight: AbortController | null = null;
  private querySeq = 0;
  private settled: Promise<void> = Promise.resolve();

  constructor(options: ExplorerOptions) {
    this.client = new ExplorerClient({
      baseUrl: options.baseUrl,
      ...(options.fetchFn ? { fetchFn: options.fetchFn } : {}),
    });
    this.mount = options.mount;
    this.top = options.top ?? 20;
    if (options.session !== undefined) this.session = options.session;
    this.render();
  }

  get state(): ExplorerState {
    return this.stateValue;
  }

  /** Resolves once every request issued so far has settled. */
  whenIdle(): Promise<void> {
    return this.settled;
  }

  load(): Promise<void> {
    const work = this.loadOnce();
    this.settled = this.settled.then(() => work);
    return work;
  }

  openCard(id: string): void {
    const item = this.stateValue.items.find((candidate) => candidate.id === id);
    if (!item) return;
    this.dispatch({ type: "card-opened", item });
  }

  closeCard(): void {
    this.dispatch({ type: "card-closed" });
  }

  setAlpha(alpha: number): Promise<void> {
    const card = this.stateValue.card;
    if (!card) return Promise.resolve();
    return this.query(alpha, card.k);
  }

  setConcept(k: number): Promise<void> {
    const card = this.stateValue.card;
    if (!card) return Promise.resolve();
    return this.query(card.alpha, k);
  }

  retry(): void {
    void this.load();
  }

  private async loadOnce(): Promise<void> {
    this.dispatch({ type: "gallery-loading" });
    try {
      const [response, entries] = await Promise.all([
        this.client.anomalies(this.top, this.session),
        this.client.scenarios(),
      ]);
      const active = entries.find((entry) => entry.session === response.session);
      this.dispatch({
        type: "gallery-loaded",
        response,
        nConcepts: active?.n_concepts ?? 2,
      });
    } catch (error) {
      this.dispatch({ type: "gallery-failed", message: message(error) });
    }
  }

  private query(alpha: number, k: number): Promise<void> {
    const card = this.stateValue.card;
    if (!card) return Promise.resolve();
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.querySeq += 1;
    const seq = this.querySeq;
    this.dispatch({ type: "whatif-started", alpha, k });
    const work = (async () => {
      try {
        const response = await this.client.whatif(
          {
            id: card.id,
            alpha,
            k,
            ...(this.stateValue.session ? { session: this.stateValue.session } : {}),
          },
          controller.signal,
        );
        if (seq !== this.querySeq) return; // a newer query took over
        this.dispatch({
          type: "whatif-resolved",
          record: { alpha, k, response },
        });
      } catch (error) {
        if (seq !== this.querySeq) return;
        const name = (error as { name?: unknown } | null)?.name;
        if (name === "AbortError") return;
        this.dispatch({ type: "whatif-failed", message: message(error) });
      }
    })();
    this.settled = this.settled.then(() => work);
    return work;
  }

  private dispatch(action: Action): void {
    this.stateValue = reduce(this.stateValue, action);
    this.render();
  }

  private render(): void {
    const handlers: Handlers = {
      imageUrl: (id) => this.client.imageUrl(id, this.stateValue.session ?? undefined),
      onRetry: () => this.retry(),
      onOpen: (id) => this.openCard(id),
      onAlpha: (alpha) => void this.setAlpha(alpha),
      onConcept: (k) => void this.setConcept(k),
    };
    const doc = this.mount.ownerDocument;
    this.mount.replaceChildren(renderApp(this.stateValue, handlers, doc));
  }
}

export function createExplorer(options: ExplorerOptions): Explorer {
  return new Explorer(options);
}
