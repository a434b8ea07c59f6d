/** Entry point: hash routing between the explorer and session screens. */

import { Api } from "./api.js";
import { composePair } from "./composers.js";
import { SessionViewModel } from "./model.js";
import { el, renderExplorer, renderSession } from "./render.js";

const api = new Api("");
const vm = new SessionViewModel(api);

function mount(): HTMLElement {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  return root;
}

async function route(): Promise<void> {
  const root = mount();
  const hash = window.location.hash;
  const sessionMatch = /^#\/session\/(.+)$/.exec(hash);
  if (sessionMatch) {
    const id = sessionMatch[1]!;
    if (vm.view.snapshot?.id !== id) {
      await vm.load(id); // reload restores the identical server state
    }
    renderSession(root, vm, vm.view);
    return;
  }
  await renderExplorer(root, api, (fixture, instance, start) => {
    void startChallenge(fixture, instance, start);
  });
}

async function startChallenge(fixture: string, instance: string, start: string[]): Promise<void> {
  const humanSide = window.confirm("Play Duplicator? (cancel plays Spoiler)")
    ? "duplicator"
    : "spoiler";
  const payload =
    instance === "bisim-metric" ? { start: [...start, prompt("slack eps (e.g. 1/2)?", "1/2") ?? "1/2"] } : { start };
  await vm.create({ fixture, instance, humanSide, ...payload });
  const snap = vm.view.snapshot;
  if (snap) {
    window.location.hash = `#/session/${snap.id}`;
  } else {
    const root = mount();
    root.append(el("p", { class: "error" }, vm.view.error ?? "session creation failed"));
  }
}

vm.subscribe(() => {
  if (window.location.hash.startsWith("#/session/")) {
    renderSession(mount(), vm, vm.view);
  }
});

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());

export { composePair, vm };
