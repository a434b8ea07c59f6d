/** The view model never computes game semantics: after any sequence of
 * scripted moves its state is exactly the last server snapshot, rejections
 * surface inline without losing composer state, and a reload restores the
 * server state verbatim. */

import { afterEach, describe, expect, it, vi } from "vitest";

import { Api, Move, Snapshot } from "../src/api.js";
import { SessionViewModel } from "../src/model.js";

function snap(partial: Partial<Snapshot>): Snapshot {
  return {
    id: "s1",
    instance: "kripke-bisim",
    humanSide: "spoiler",
    position: { kind: "pair", pair: ["p", "q"] },
    positionLabel: "(p,q)",
    history: ["(p,q)"],
    finished: false,
    winner: null,
    reason: null,
    turn: "spoiler",
    step: 0,
    cap: 60,
    transcript: [{ event: "position", label: "(p,q)" }],
    legalMoves: [{ kind: "observation", top: ["p", "q"] }],
    ...partial,
  };
}

type Route = { status: number; body: unknown };

function stubFetch(script: Route[]): void {
  const queue = [...script];
  vi.stubGlobal(
    "fetch",
    vi.fn(async () => {
      const next = queue.shift();
      if (!next) throw new Error("fetch script exhausted");
      return {
        ok: next.status < 400,
        status: next.status,
        json: async () => next.body,
      } as Response;
    }),
  );
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("SessionViewModel", () => {
  it("mirrors the server snapshot after scripted moves", async () => {
    const after1 = snap({
      history: ["(p,q)", "k{p,q}"],
      positionLabel: "k{p,q}",
      position: { kind: "observation", top: ["p", "q"] },
      finished: true,
      winner: "spoiler",
      reason: "stuck",
      turn: null,
      legalMoves: [],
      transcript: [
        { event: "position", label: "(p,q)" },
        { event: "move", side: "spoiler", label: "k{p,q}" },
        { event: "position", label: "k{p,q}" },
        { event: "finished", winner: "spoiler", reason: "stuck" },
      ],
    });
    stubFetch([
      { status: 201, body: snap({}) },
      { status: 200, body: after1 },
    ]);
    const vm = new SessionViewModel(new Api(""));
    await vm.create({ fixture: "K_DEAD", instance: "kripke-bisim", start: ["p", "q"], humanSide: "spoiler" });
    expect(vm.view.snapshot).toEqual(snap({}));
    await vm.submit({ kind: "observation", top: ["p", "q"] });
    // the UI state IS the API state: snapshot and transcript come verbatim
    expect(vm.view.snapshot).toEqual(after1);
    expect(vm.view.error).toBeNull();
  });

  it("pre-validates finite moves against the legal list locally", async () => {
    stubFetch([{ status: 201, body: snap({}) }]);
    const vm = new SessionViewModel(new Api(""));
    await vm.create({ fixture: "K_DEAD", instance: "kripke-bisim", start: ["p", "q"], humanSide: "spoiler" });
    await vm.submit({ kind: "observation", top: ["q"] });
    expect(vm.view.error).toMatch(/not in the legal list/);
    // no network call was made for the rejected move
    expect((fetch as unknown as { mock: { calls: unknown[] } }).mock.calls.length).toBe(1);
  });

  it("surfaces a 422 inline and keeps the composer state", async () => {
    const metric = snap({
      instance: "bisim-metric",
      position: { kind: "metric-position", x: "x", y: "y", eps: "1/4" },
      positionLabel: "(x,y,1/4)",
      legalMoves: undefined,
      oracleHint: [],
    });
    stubFetch([
      { status: 201, body: metric },
      { status: 422, body: { detail: { error: "illegal move from (x,y,1/4)", legalMoves: [] } } },
    ]);
    const vm = new SessionViewModel(new Api(""));
    await vm.create({ fixture: "M_SPLIT", instance: "bisim-metric", start: ["x", "y", "1/4"], humanSide: "spoiler" });
    vm.editComposer((c) => ({ ...c, fnInputs: { x: "0", y: "0", z: "1/8" } }));
    const move: Move = { kind: "function", f: { x: "0", y: "0", z: "1/8" } };
    await vm.submit(move);
    expect(vm.view.error).toMatch(/422/);
    expect(vm.view.snapshot).toEqual(metric); // state unharmed
    expect(vm.view.composer.fnInputs).toEqual({ x: "0", y: "0", z: "1/8" }); // composer kept
  });

  it("surfaces a 409 conflict inline", async () => {
    stubFetch([
      { status: 201, body: snap({}) },
      { status: 409, body: { detail: "a move on this session is in flight" } },
    ]);
    const vm = new SessionViewModel(new Api(""));
    await vm.create({ fixture: "K_DEAD", instance: "kripke-bisim", start: ["p", "q"], humanSide: "spoiler" });
    await vm.submit({ kind: "observation", top: ["p", "q"] });
    expect(vm.view.error).toMatch(/409/);
  });

  it("reload restores exactly the server state", async () => {
    const current = snap({ step: 2, history: ["(p,q)", "k{p}", "(p,q)"] });
    stubFetch([{ status: 200, body: current }]);
    const vm = new SessionViewModel(new Api(""));
    await vm.load("s1");
    expect(vm.view.snapshot).toEqual(current);
  });

  it("refuses to submit into a finished play", async () => {
    stubFetch([{ status: 200, body: snap({ finished: true, winner: "spoiler", turn: null }) }]);
    const vm = new SessionViewModel(new Api(""));
    await vm.load("s1");
    await vm.submit({ kind: "observation", top: ["p", "q"] });
    expect(vm.view.error).toMatch(/finished/);
  });

  it("notifies subscribers on every state change", async () => {
    stubFetch([{ status: 200, body: snap({}) }]);
    const vm = new SessionViewModel(new Api(""));
    const seen: boolean[] = [];
    vm.subscribe((state) => seen.push(state.busy));
    await vm.load("s1");
    expect(seen).toEqual([true, false]);
  });
});
