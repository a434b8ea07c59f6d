/** Move composers: build wire moves from picker state, pre-validating finite
 * moves against the server-provided legal list; metric function moves are
 * quantized and submitted optimistically (the server stays the validator). */

import type { Move, Snapshot } from "./api.js";
import { formatRational, inUnitInterval, limitDenominator, parseRational } from "./rational.js";

export interface ComposerState {
  pair: [string, string] | null;
  subset: Set<string>;
  entry: string | null;
  fnInputs: Record<string, string>;
  epsInput: string;
  freshPick: string | null;
}

export function emptyComposer(): ComposerState {
  return { pair: null, subset: new Set(), entry: null, fnInputs: {}, epsInput: "", freshPick: null };
}

export function moveKey(move: Move): string {
  return JSON.stringify(sortedMove(move));
}

function sortedMove(move: Move): unknown {
  switch (move.kind) {
    case "observation":
      return { kind: move.kind, entry: move.entry ?? null, top: [...move.top].sort() };
    case "subset":
      return { kind: move.kind, Z: [...move.Z].sort() };
    default:
      return move;
  }
}

/** Client-side pre-validation for finite-move games: only moves present in
 * the server's legal list may be submitted. */
export function isPreValidated(move: Move, snapshot: Snapshot): boolean {
  if (!snapshot.legalMoves) return true; // oracle-backed: server validates
  const key = moveKey(move);
  return snapshot.legalMoves.some((m) => moveKey(m) === key);
}

export function composePair(pair: [string, string]): Move {
  return { kind: "pair", pair };
}

export function composeObservation(top: Iterable<string>, entry?: string): Move {
  const sorted = [...top].sort();
  return entry === undefined ? { kind: "observation", top: sorted } : { kind: "observation", top: sorted, entry };
}

export function composeSubset(z: Iterable<string>): Move {
  return { kind: "subset", Z: [...z].sort() };
}

/** Function editor: every state needs a value in [0,1]; inputs accept exact
 * fractions or decimals and are quantized to denominators <= 1000. */
export function composeFunction(states: string[], inputs: Record<string, string>): Move {
  const f: Record<string, string> = {};
  for (const state of states) {
    const raw = inputs[state];
    if (raw === undefined || raw.trim() === "") {
      throw new Error(`missing value for state ${state}`);
    }
    const value = limitDenominator(parseRational(raw), 1000n);
    if (!inUnitInterval(value)) {
      throw new Error(`value for ${state} must lie in [0,1]`);
    }
    f[state] = formatRational(value);
  }
  return { kind: "function", f };
}

export function composeMetricPosition(x: string, y: string, epsInput: string): Move {
  const eps = limitDenominator(parseRational(epsInput), 1000n);
  if (!inUnitInterval(eps)) throw new Error("slack must lie in [0,1]");
  return { kind: "metric-position", x, y, eps: formatRational(eps) };
}

export function composeTopology(opens: string[][]): Move {
  return { kind: "topology", opens };
}

/** Parse an uploaded system document; the server re-validates the schema. */
export function parseUploadDocument(text: string): Record<string, unknown> {
  if (!text.trim()) {
    throw new Error("empty upload: paste a system document first");
  }
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new Error("upload is not valid JSON");
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new Error("upload must be a JSON object");
  }
  return doc as Record<string, unknown>;
}
