/** Session view-state store.
 *
 * The store never mutates model state locally: every change flows from a
 * service response (single source of truth). At most one turn may be in
 * flight per session; concurrent submissions are rejected client-side before
 * they reach the wire.
 */

import { ApiError, CadClient, MeshPayload, ScriptRecord, TurnResult } from "./api";

export interface TurnLogEntry {
  instruction: string;
  editedOps: number[];
  total: number | null;
}

export interface ViewState {
  sessionId: string | null;
  kind: string;
  mesh: MeshPayload;
  modelText: string;
  highlighted: number[];
  turnLog: TurnLogEntry[];
  pending: boolean;
  banner: string | null;
}

const EMPTY_MESH: MeshPayload = { vertices: [], triangles: [], triangle_op: [] };

export class SessionStore {
  private client: CadClient;
  private listeners: Array<(s: ViewState) => void> = [];
  state: ViewState = {
    sessionId: null,
    kind: "dsl",
    mesh: EMPTY_MESH,
    modelText: "",
    highlighted: [],
    turnLog: [],
    pending: false,
    banner: null,
  };

  constructor(client: CadClient) {
    this.client = client;
  }

  subscribe(listener: (s: ViewState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit() {
    for (const listener of this.listeners) listener(this.state);
  }

  private set(partial: Partial<ViewState>) {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  async start(backend = "manual", kind = "dsl"): Promise<void> {
    const created = await this.client.createSession(backend, kind);
    this.set({
      sessionId: created.id,
      kind: created.kind,
      mesh: EMPTY_MESH,
      modelText: "",
      highlighted: [],
      turnLog: [],
      banner: null,
      pending: false,
    });
  }

  private applyTurnResult(result: TurnResult, logInstruction: string) {
    const edited = result.edited_flags
      .map((flag, index) => (flag ? index : -1))
      .filter((index) => index >= 0);
    this.set({
      mesh: result.mesh,
      modelText: result.model.text,
      highlighted: edited,
      turnLog: [
        ...this.state.turnLog,
        {
          instruction: logInstruction,
          editedOps: edited,
          total: result.reward ? result.reward.total : null,
        },
      ],
      pending: false,
      banner: null,
    });
  }

  async submitTurn(instruction: string, script?: ScriptRecord): Promise<TurnResult | null> {
    if (this.state.pending) {
      this.set({ banner: "a turn is already in flight" });
      return null;
    }
    if (!this.state.sessionId) {
      this.set({ banner: "no active session" });
      return null;
    }
    this.set({ pending: true, banner: null });
    try {
      const result = await this.client.turn(this.state.sessionId, instruction, script);
      this.applyTurnResult(result, instruction);
      return result;
    } catch (error) {
      this.set({ pending: false, banner: describeError(error) });
      return null;
    }
  }

  async undoTurn(): Promise<TurnResult | null> {
    if (this.state.pending || !this.state.sessionId) {
      this.set({ banner: this.state.pending ? "a turn is already in flight" : "no active session" });
      return null;
    }
    this.set({ pending: true, banner: null });
    try {
      const result = await this.client.undo(this.state.sessionId);
      this.applyTurnResult(result, result.instruction);
      return result;
    } catch (error) {
      this.set({ pending: false, banner: describeError(error) });
      return null;
    }
  }

  async exportModel(kind: string): Promise<string | null> {
    if (!this.state.modelText) {
      this.set({ banner: "nothing to export yet" });
      return null;
    }
    if (kind === this.state.kind) return this.state.modelText;
    try {
      const converted = await this.client.convert(this.state.modelText, this.state.kind, kind);
      return converted.text;
    } catch (error) {
      this.set({ banner: describeError(error) });
      return null;
    }
  }
}

export function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    const detail =
      typeof error.detail === "object" && error.detail !== null
        ? JSON.stringify((error.detail as Record<string, unknown>).detail ?? error.detail)
        : String(error.detail);
    return `service ${error.status}: ${detail}`;
  }
  if (error instanceof Error) return `connection failed: ${error.message}`;
  return "unknown error";
}
