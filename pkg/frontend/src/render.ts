/** DOM rendering for the explorer and session screens. No framework: the
 * screens re-render from the view model's state on every change. */

import { Api, FiberJson, Move, Snapshot, SolveReport } from "./api.js";
import {
  composeFunction,
  composeMetricPosition,
  composeObservation,
  composePair,
  composeSubset,
} from "./composers.js";
import { SessionViewModel, SessionViewState } from "./model.js";
import { parseRational, toDecimal } from "./rational.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function showRational(text: string, decimal: boolean): string {
  if (!decimal || !/^[+-]?\d+(\/\d+)?$/.test(text)) return text;
  return toDecimal(parseRational(text));
}

export function moveLabel(move: Move): string {
  switch (move.kind) {
    case "pair":
      return `(${move.pair[0]},${move.pair[1]})`;
    case "observation":
      return `${move.entry !== undefined ? move.entry + "/" : ""}k{${move.top.join(",")}}`;
    case "subset":
      return `Z{${move.Z.join(",")}}`;
    case "orient-challenge":
      return `s=${move.s},t=${move.t},Z{${move.Z.join(",")}}`;
    case "widened":
      return `Z'{${move.Zp.join(",")}}`;
    case "fresh":
      return `y'=${move.y}`;
    case "function":
      return `f{${Object.entries(move.f).map(([s, v]) => `${s}:${v}`).join(",")}}`;
    case "metric-position":
      return `(${move.x},${move.y},${move.eps})`;
    case "topology":
      return `O{${move.opens.map((u) => `{${u.join(",")}}`).join(";")}}`;
  }
}

export function renderFiber(fiber: FiberJson, decimal: boolean): HTMLElement {
  switch (fiber.kind) {
    case "EquivRel":
      return el(
        "div",
        { class: "fiber" },
        "partition: ",
        fiber.blocks.map((b) => `{${b.join(",")}}`).join("  "),
      );
    case "EndoRel":
    case "Preorder":
      return el(
        "div",
        { class: "fiber" },
        "pairs: ",
        fiber.pairs.map(([x, y]) => `(${x},${y})`).join(" "),
      );
    case "PseudoMetric": {
      const table = el("table", { class: "metric" });
      table.append(
        el("tr", {}, el("th"), ...fiber.states.map((s) => el("th", {}, s))),
      );
      fiber.matrix.forEach((row, i) => {
        table.append(
          el(
            "tr",
            {},
            el("th", {}, fiber.states[i] ?? ""),
            ...row.map((v) => el("td", { class: "num" }, showRational(v, decimal))),
          ),
        );
      });
      return table;
    }
    case "Topology":
      return el(
        "div",
        { class: "fiber" },
        "opens: ",
        fiber.opens.map((u) => `{${u.join(",")}}`).join(" "),
      );
  }
}

export function renderRegion(report: SolveReport, states: string[]): HTMLElement {
  const region = new Set((report.winningRegion ?? []).map(([x, y]) => `${x}|${y}`));
  const table = el("table", { class: "region" });
  table.append(el("tr", {}, el("th"), ...states.map((s) => el("th", {}, s))));
  for (const x of states) {
    table.append(
      el(
        "tr",
        {},
        el("th", {}, x),
        ...states.map((y) =>
          el("td", { class: region.has(`${x}|${y}`) ? "dup" : "spo" }, region.has(`${x}|${y}`) ? "D" : "S"),
        ),
      ),
    );
  }
  return table;
}

// --- session screen -----------------------------------------------------------

export function renderSession(
  root: HTMLElement,
  vm: SessionViewModel,
  state: SessionViewState,
): void {
  root.replaceChildren();
  const snap = state.snapshot;
  if (!snap) {
    root.append(el("p", {}, state.busy ? "loading session…" : state.error ?? "no session"));
    return;
  }
  root.append(
    el(
      "div",
      { class: "status" },
      el("h2", {}, `${snap.instance} — position ${snap.positionLabel}`),
      el(
        "p",
        {},
        snap.finished
          ? `finished: ${snap.winner ?? "undetermined"} (${snap.reason ?? ""})`
          : `turn: ${snap.turn} (you are ${snap.humanSide}) — step ${snap.step}/${snap.cap}`,
      ),
    ),
  );
  if (state.error) {
    root.append(el("p", { class: "error", role: "alert" }, state.error));
  }
  if (!snap.finished && snap.turn === snap.humanSide) {
    root.append(renderComposer(vm, state, snap));
  }
  const history = el("ol", { class: "history" });
  for (const label of snap.history) history.append(el("li", {}, label));
  root.append(el("h3", {}, "history"), history);
  const transcript = el("ul", { class: "transcript" });
  for (const entry of snap.transcript) {
    if (entry.event === "move") transcript.append(el("li", {}, `${entry.side} played ${entry.label}`));
    else if (entry.event === "finished")
      transcript.append(el("li", {}, `winner: ${entry.winner ?? "undetermined"} (${entry.reason})`));
  }
  root.append(el("h3", {}, "transcript"), transcript);
}

function renderComposer(vm: SessionViewModel, state: SessionViewState, snap: Snapshot): HTMLElement {
  const box = el("div", { class: "composer" });
  const legal = snap.legalMoves;
  if (legal !== undefined) {
    // finite game: the legal list is the whole vocabulary
    box.append(el("h3", {}, `legal moves (${legal.length})`));
    const list = el("div", { class: "legal" });
    for (const move of legal) {
      const button = el("button", { type: "button" }, moveLabel(move));
      button.addEventListener("click", () => void vm.submit(move));
      list.append(button);
    }
    box.append(list);
    return box;
  }
  // oracle-backed games: free composers, server-validated
  const hint = snap.oracleHint ?? [];
  if (hint.length) {
    box.append(el("p", { class: "hint" }, `engine hint: ${hint.map(moveLabel).join(" | ")}`));
  }
  if (snap.instance === "bisim-metric") {
    box.append(renderMetricComposer(vm, state, snap));
  } else {
    box.append(el("p", {}, "compose a topology move in the JSON box below"));
    box.append(renderJsonComposer(vm));
  }
  return box;
}

function statesOf(snap: Snapshot): string[] {
  if (snap.position.kind === "function") return Object.keys(snap.position.f);
  const fromHint = snap.oracleHint?.find((m) => m.kind === "function");
  if (fromHint && fromHint.kind === "function") return Object.keys(fromHint.f);
  return [];
}

function renderMetricComposer(vm: SessionViewModel, state: SessionViewState, snap: Snapshot): HTMLElement {
  const box = el("div", { class: "metric-composer" });
  if (snap.position.kind === "metric-position") {
    // Spoiler composes a function move: one rational per state
    const states = statesOf(snap);
    box.append(el("h3", {}, "challenge function f (values in [0,1], quantized to /1000)"));
    for (const s of states.length ? states : []) {
      const input = el("input", {
        type: "text",
        placeholder: "0",
        value: state.composer.fnInputs[s] ?? "",
        "data-state": s,
      });
      input.addEventListener("input", () => {
        vm.editComposer((c) => ({ ...c, fnInputs: { ...c.fnInputs, [s]: input.value } }));
      });
      box.append(el("label", {}, `f(${s}) = `, input), el("br"));
    }
    const submit = el("button", { type: "button" }, "submit f");
    submit.addEventListener("click", () => {
      try {
        void vm.submit(composeFunction(statesOf(snap), vm.view.composer.fnInputs));
      } catch (err) {
        alert(err instanceof Error ? err.message : String(err));
      }
    });
    box.append(submit);
  } else {
    // Duplicator composes (x', y', eps')
    box.append(el("h3", {}, "rebut with a pair and slack (x, y, eps)"));
    const x = el("input", { type: "text", placeholder: "x" });
    const y = el("input", { type: "text", placeholder: "y" });
    const eps = el("input", { type: "text", placeholder: "eps e.g. 7/10" });
    const submit = el("button", { type: "button" }, "submit position");
    submit.addEventListener("click", () => {
      try {
        void vm.submit(composeMetricPosition(x.value.trim(), y.value.trim(), eps.value));
      } catch (err) {
        alert(err instanceof Error ? err.message : String(err));
      }
    });
    box.append(x, y, eps, submit);
  }
  return box;
}

function renderJsonComposer(vm: SessionViewModel): HTMLElement {
  const area = el("textarea", { rows: "4", cols: "60", placeholder: '{"kind": …}' });
  const submit = el("button", { type: "button" }, "submit JSON move");
  submit.addEventListener("click", () => {
    try {
      void vm.submit(JSON.parse(area.value) as Move);
    } catch (err) {
      alert(err instanceof Error ? err.message : String(err));
    }
  });
  return el("div", {}, area, el("br"), submit);
}

// --- explorer screen -----------------------------------------------------------

export const INSTANCES = [
  "kripke-bisim",
  "kripke-sim:lower",
  "kripke-sim:upper",
  "kripke-sim:convex",
  "prob-bisim",
  "prob-bisim-desharnais",
  "bisim-metric",
  "dfa-lang",
  "nfa-bisim",
  "dfa-topology:sierpinski",
  "dfa-topology:discrete",
  "transfer-check",
];

const PLAYABLE: Record<string, string[]> = {
  kripke: ["kripke-bisim", "kripke-sim:lower", "kripke-sim:upper", "kripke-sim:convex"],
  markov: ["prob-bisim", "prob-bisim-desharnais", "bisim-metric"],
  dfa: ["dfa-lang", "dfa-topology:sierpinski", "dfa-topology:discrete"],
  nfa: ["nfa-bisim"],
};

export async function renderExplorer(
  root: HTMLElement,
  api: Api,
  onChallenge: (fixture: string, instance: string, start: string[]) => void,
  decimal = false,
): Promise<void> {
  root.replaceChildren(el("p", {}, "loading fixtures…"));
  const examples = await api.examples();
  root.replaceChildren(el("h2", {}, "systems"));
  root.append(renderUpload(api, decimal));
  for (const example of examples) {
    const section = el("section", { class: "system" }, el("h3", {}, `${example.name} (${example.type})`));
    const out = el("div", { class: "solve-result" });
    const instances = PLAYABLE[example.type] ?? (example.type === "metric-space" ? ["hausdorff"] : []);
    for (const instance of instances) {
      const button = el("button", { type: "button" }, `solve ${instance}`);
      button.addEventListener("click", async () => {
        out.replaceChildren(el("p", {}, "solving…"));
        try {
          const report = await api.solve({ fixture: example.name, instance });
          out.replaceChildren(renderSolve(report, example, instance, onChallenge, decimal));
        } catch (err) {
          out.replaceChildren(el("p", { class: "error" }, String(err)));
        }
      });
      section.append(button);
    }
    section.append(out);
    root.append(section);
  }
}

function renderUpload(api: Api, decimal: boolean): HTMLElement {
  const box = el("section", { class: "system upload" }, el("h3", {}, "upload a system"));
  const area = el("textarea", {
    rows: "5",
    cols: "70",
    placeholder: '{"type": "kripke", "states": ["p"], "succ": {"p": ["p"]}}',
  });
  const picker = el("select", {});
  for (const instance of INSTANCES) picker.append(el("option", { value: instance }, instance));
  const out = el("div", { class: "solve-result" });
  const button = el("button", { type: "button" }, "solve upload");
  button.addEventListener("click", async () => {
    const { parseUploadDocument } = await import("./composers.js");
    try {
      const document = parseUploadDocument(area.value);
      out.replaceChildren(el("p", {}, "solving…"));
      const report = await api.solve({ system: document, instance: picker.value });
      out.replaceChildren(el("p", {}, `consistent: ${report.consistent ? "ok" : "FAILED"}`));
      if (report.fixpoint) out.append(renderFiber(report.fixpoint.result, decimal));
      const states = (document.states as string[] | undefined) ?? [];
      if (report.winningRegion && states.length) out.append(renderRegion(report, states));
    } catch (err) {
      // empty uploads and schema violations surface inline with the message
      out.replaceChildren(el("p", { class: "error" }, err instanceof Error ? err.message : String(err)));
    }
  });
  box.append(area, el("br"), picker, button, out);
  return box;
}

function renderSolve(
  report: SolveReport,
  example: { name: string; document: Record<string, unknown> },
  instance: string,
  onChallenge: (fixture: string, instance: string, start: string[]) => void,
  decimal: boolean,
): HTMLElement {
  const box = el("div", {});
  box.append(el("p", {}, `consistent: ${report.consistent ? "ok" : "FAILED"}`));
  if (report.fixpoint) box.append(renderFiber(report.fixpoint.result, decimal));
  if (report.topology && report.specialization) {
    box.append(renderFiber(report.topology, decimal), renderFiber(report.specialization, decimal));
  }
  if (report.direct !== undefined) {
    box.append(el("p", {}, `direct: ${report.direct}, observation-based: ${report.codensity}`));
  }
  const states = (example.document.states as string[] | undefined) ?? [];
  if (report.winningRegion && states.length) {
    box.append(renderRegion(report, states));
    if (instance !== "transfer-check") {
      for (const x of states) {
        for (const y of states) {
          if (x === y) continue;
          const challenge = el("button", { type: "button", class: "challenge" }, `challenge (${x},${y})`);
          challenge.addEventListener("click", () => onChallenge(example.name, instance, [x, y]));
          box.append(challenge);
        }
      }
    }
  }
  return box;
}
