/** Session view model: the server snapshot is the single source of truth;
 * the model only tracks composer state, in-flight status and surfaced
 * errors, and replaces its snapshot wholesale with every server response. */

import { Api, ApiError, Move, Snapshot } from "./api.js";
import { ComposerState, emptyComposer, isPreValidated } from "./composers.js";

export interface SessionViewState {
  snapshot: Snapshot | null;
  composer: ComposerState;
  error: string | null;
  rejectedLegal: Move[];
  busy: boolean;
  decimal: boolean;
}

export type Listener = (state: SessionViewState) => void;

export class SessionViewModel {
  private state: SessionViewState = {
    snapshot: null,
    composer: emptyComposer(),
    error: null,
    rejectedLegal: [],
    busy: false,
    decimal: false,
  };
  private listeners = new Set<Listener>();

  constructor(private readonly api: Api) {}

  get view(): SessionViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private update(patch: Partial<SessionViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  setDecimal(decimal: boolean): void {
    this.update({ decimal });
  }

  editComposer(edit: (composer: ComposerState) => ComposerState): void {
    this.update({ composer: edit(this.state.composer) });
  }

  async create(request: Parameters<Api["createSession"]>[0]): Promise<void> {
    this.update({ busy: true, error: null });
    try {
      const snapshot = await this.api.createSession(request);
      this.update({ snapshot, busy: false, composer: emptyComposer(), rejectedLegal: [] });
    } catch (err) {
      this.update({ busy: false, error: describe(err) });
    }
  }

  /** Reload from the server; the restored state is exactly the server's. */
  async load(id: string): Promise<void> {
    this.update({ busy: true, error: null });
    try {
      const snapshot = await this.api.getSession(id);
      this.update({ snapshot, busy: false });
    } catch (err) {
      this.update({ busy: false, error: describe(err) });
    }
  }

  /** Submit a move. Finite games are pre-validated against the legal list;
   * a server rejection surfaces inline and keeps the composer state. */
  async submit(move: Move): Promise<void> {
    const snapshot = this.state.snapshot;
    if (!snapshot) throw new Error("no active session");
    if (snapshot.finished) {
      this.update({ error: "the play is finished" });
      return;
    }
    if (!isPreValidated(move, snapshot)) {
      this.update({ error: "move is not in the legal list" });
      return;
    }
    this.update({ busy: true, error: null });
    try {
      const next = await this.api.move(snapshot.id, move);
      this.update({
        snapshot: next,
        busy: false,
        composer: emptyComposer(),
        rejectedLegal: [],
      });
    } catch (err) {
      if (err instanceof ApiError && (err.status === 422 || err.status === 409)) {
        // inline error; composer state is preserved deliberately
        this.update({ busy: false, error: describe(err), rejectedLegal: err.legalMoves });
        return;
      }
      this.update({ busy: false, error: describe(err) });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
