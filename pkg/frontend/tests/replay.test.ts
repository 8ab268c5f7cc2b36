import { describe, expect, it } from "vitest";

import { createExplorer, type Explorer } from "../src/controller.js";
import type { WhatIfRequest, WhatIfResponse } from "../src/types.js";
import { abortError, fixture, fixtureServer, jsonResponse } from "./helpers.js";

function mountPoint(): HTMLElement {
  const mount = document.createElement("div");
  document.body.replaceChildren(mount);
  return mount;
}

function ceSrc(mount: HTMLElement, k: number): string | null | undefined {
  return mount.querySelector(`.ce[data-k="${k}"] img`)?.getAttribute("src");
}

/** The recorded interaction: open the gallery, open the top card, then
 * three what-if queries — sweep alpha 1 -> 0 on concept 0, switch to
 * concept 1 at the current alpha. All driven through the DOM. */
async function replayInteraction(mount: HTMLElement): Promise<Explorer> {
  const { fetchFn } = fixtureServer();
  const explorer = createExplorer({
    baseUrl: "http://fixture:8000",
    mount,
    top: 8,
    fetchFn,
  });
  await explorer.load();

  mount.querySelector<HTMLButtonElement>(".tile button")?.click();

  const queries: Array<[number, number]> = [
    [1.0, 0],
    [0.0, 0],
  ];
  for (const [alpha] of queries) {
    const slider = mount.querySelector<HTMLInputElement>("input.alpha");
    if (!slider) throw new Error("card has no alpha slider");
    slider.value = String(alpha);
    slider.dispatchEvent(new Event("change"));
    await explorer.whenIdle();
  }
  mount.querySelector<HTMLButtonElement>('button.concept[data-k="1"]')?.click();
  await explorer.whenIdle();
  return explorer;
}

describe("recorded interaction replay", () => {
  it("reproduces the captured payloads byte for byte and a stable DOM", async () => {
    const mount = mountPoint();
    const explorer = await replayInteraction(mount);

    // Gallery: 8 items rendered in score order, ties preserved.
    const tiles = [...mount.querySelectorAll<HTMLElement>(".tile")];
    expect(tiles.map((tile) => tile.dataset.id)).toEqual(
      fixture.anomalies.items.map((item) => item.id),
    );

    // Counterfactual payloads equal the service capture byte for byte
    // (base64 equality is byte equality).
    expect(ceSrc(mount, 0)).toBe(
      `data:image/png;base64,${fixture.whatif[1]?.response.image}`,
    );
    expect(ceSrc(mount, 1)).toBe(
      `data:image/png;base64,${fixture.whatif[2]?.response.image}`,
    );

    // History carries all three queries in issue order, snapped alphas.
    expect(
      explorer.state.card?.history.map((record) => [
        record.response.condition.alpha,
        record.k,
      ]),
    ).toEqual([
      [1.0, 0],
      [0.0, 0],
      [0.0, 1],
    ]);
    expect(mount.querySelectorAll(".history li")).toHaveLength(3);

    // The DOM is stable: pinned as a snapshot, and a second replay of
    // the same log renders the identical tree.
    expect(mount.innerHTML).toMatchSnapshot();
    const second = mountPoint();
    await replayInteraction(second);
    expect(second.innerHTML).toBe(mount.innerHTML);
  });

  it("shows the empty state when the service has no sessions", async () => {
    const mount = mountPoint();
    const { fetchFn } = fixtureServer({ anomalies: fixture.empty_anomalies });
    const explorer = createExplorer({
      baseUrl: "http://fixture:8000",
      mount,
      top: 8,
      fetchFn,
    });
    await explorer.load();
    expect(mount.querySelector(".empty")).not.toBeNull();
    expect(mount.querySelector(".gallery")).toBeNull();
  });

  it("recovers from an unreachable server through the retry control", async () => {
    const mount = mountPoint();
    const live = fixtureServer();
    let reachable = false;
    const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
      if (!reachable) throw new TypeError("connect ECONNREFUSED");
      return live.fetchFn(input, init);
    }) as unknown as typeof fetch;

    const explorer = createExplorer({
      baseUrl: "http://flaky:8000",
      mount,
      top: 8,
      fetchFn,
    });
    await explorer.load();
    expect(mount.querySelector(".error")?.textContent).toContain("unreachable");

    reachable = true;
    mount.querySelector<HTMLButtonElement>("button.retry")?.click();
    await explorer.whenIdle();
    expect(mount.querySelectorAll(".tile")).toHaveLength(8);
  });

  it("keeps one what-if in flight per card: newer queries cancel older", async () => {
    const mount = mountPoint();
    const base = fixtureServer();
    const signals: AbortSignal[] = [];
    const gates: Array<(response: Response) => void> = [];
    const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = new URL(String(input));
      if (url.pathname !== "/api/v1/whatif") return base.fetchFn(input, init);
      const body = JSON.parse(String(init?.body)) as WhatIfRequest;
      const match = fixture.whatif.find(
        (exchange) =>
          exchange.request.alpha === body.alpha && exchange.request.k === body.k,
      );
      if (!match) return jsonResponse({ detail: "no fixture" }, 404);
      return new Promise<Response>((resolve, reject) => {
        if (init?.signal) {
          signals.push(init.signal);
          init.signal.addEventListener("abort", () => reject(abortError()));
        }
        gates.push(() => resolve(jsonResponse(match.response)));
      });
    }) as unknown as typeof fetch;

    const explorer = createExplorer({
      baseUrl: "http://slow:8000",
      mount,
      top: 8,
      fetchFn,
    });
    await explorer.load();
    mount.querySelector<HTMLButtonElement>(".tile button")?.click();

    const first = explorer.setAlpha(1.0); // hangs at the gate
    const second = explorer.setAlpha(0.0); // must cancel the first
    expect(signals[0]?.aborted).toBe(true);
    expect(signals[1]?.aborted).toBe(false);
    gates[1]?.(jsonResponse(null));
    await Promise.all([first, second]);

    expect(explorer.state.card?.history).toHaveLength(1);
    expect(explorer.state.card?.history[0]?.alpha).toBe(0.0);
    expect(ceSrc(mount, 0)).toBe(
      `data:image/png;base64,${fixture.whatif[1]?.response.image}`,
    );
    expect(explorer.state.card?.error).toBeNull();
  });
});
