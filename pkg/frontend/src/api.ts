/** Typed client for the game service. The client never computes game
 * semantics: legality, turns and winners all come from these endpoints. */

export type Side = "duplicator" | "spoiler";

export type Move =
  | { kind: "pair"; pair: [string, string] }
  | { kind: "observation"; top: string[]; entry?: string }
  | { kind: "subset"; Z: string[] }
  | { kind: "orient-challenge"; s: string; t: string; Z: string[] }
  | { kind: "widened"; Z: string[]; Zp: string[] }
  | { kind: "fresh"; Z: string[]; y: string }
  | { kind: "function"; f: Record<string, string> }
  | { kind: "metric-position"; x: string; y: string; eps: string }
  | { kind: "topology"; opens: string[][] };

export interface TranscriptEntry {
  event: "position" | "move" | "finished";
  label?: string;
  side?: Side;
  winner?: Side | null;
  reason?: string | null;
}

export interface Snapshot {
  id: string;
  instance: string;
  humanSide: Side;
  position: Move;
  positionLabel: string;
  history: string[];
  finished: boolean;
  winner: Side | null;
  reason: string | null;
  turn: Side | null;
  step: number;
  cap: number;
  transcript: TranscriptEntry[];
  legalMoves?: Move[];
  oracleHint?: Move[];
}

export interface ExampleSystem {
  name: string;
  type: string;
  document: Record<string, unknown>;
}

export interface SolveReport {
  instance: string;
  consistent: boolean;
  crossCheck?: Record<string, boolean>;
  fixpoint?: {
    mode: string;
    iterations: number;
    converged: boolean;
    eps: string | null;
    residual: string | null;
    result: FiberJson;
  };
  winningRegion?: [string, string][];
  topology?: FiberJson;
  specialization?: FiberJson;
  transfer?: { agree: boolean; isEquivalence: boolean; relation: [string, string][] };
  direct?: string;
  codensity?: string;
}

export type FiberJson =
  | { kind: "EquivRel"; blocks: string[][] }
  | { kind: "EndoRel" | "Preorder"; pairs: [string, string][] }
  | { kind: "PseudoMetric"; states: string[]; matrix: string[][] }
  | { kind: "Topology"; opens: string[][] };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly legalMoves: Move[] = [],
  ) {
    super(message);
  }
}

export interface SessionRequest {
  fixture?: string;
  system?: Record<string, unknown>;
  instance: string;
  start: string[] | string;
  humanSide: Side;
  options?: { eps?: string; cap?: number };
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = (body as { detail?: unknown }).detail ?? body;
    if (typeof detail === "object" && detail !== null && "error" in detail) {
      const d = detail as { error: string; legalMoves?: Move[] };
      throw new ApiError(response.status, d.error, d.legalMoves ?? []);
    }
    throw new ApiError(response.status, typeof detail === "string" ? detail : JSON.stringify(detail));
  }
  return body as T;
}

export class Api {
  constructor(readonly base: string = "") {}

  examples(): Promise<ExampleSystem[]> {
    return request(this.base, "/systems/examples");
  }

  solve(body: {
    fixture?: string;
    system?: Record<string, unknown>;
    instance: string;
    options?: Record<string, unknown>;
  }): Promise<SolveReport> {
    return request(this.base, "/solve", { method: "POST", body: JSON.stringify(body) });
  }

  createSession(body: SessionRequest): Promise<Snapshot> {
    return request(this.base, "/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  getSession(id: string): Promise<Snapshot> {
    return request(this.base, `/sessions/${id}`);
  }

  move(id: string, move: Move): Promise<Snapshot> {
    return request(this.base, `/sessions/${id}/move`, {
      method: "POST",
      body: JSON.stringify({ move }),
    });
  }
}
