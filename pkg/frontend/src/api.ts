/** Typed client for the cadseq service wire format (see docs/api.md). */

export interface ModelPayload {
  kind: string;
  text: string;
}

export interface MeshPayload {
  vertices: number[];
  triangles: number[];
  triangle_op: number[];
}

export interface ScriptRecord {
  actions: Record<string, unknown>[];
  edited_ops_a: number[];
  edited_ops_b: number[];
}

export interface RewardRecord {
  r_chamfer: number;
  r_format: number;
  r_exec: number;
  r_length: number;
  total: number;
  d_cd: number | null;
  error: string | null;
}

export interface TurnResult {
  turn_index: number;
  instruction: string;
  script: ScriptRecord;
  model: ModelPayload;
  mesh: MeshPayload;
  edited_ops: number[];
  edited_flags: boolean[];
  reward: RewardRecord | null;
}

export interface SessionInfo {
  id: string;
  backend: string;
  kind: string;
  turn_count: number;
  model: ModelPayload;
  mesh: MeshPayload;
  history: { instruction: string; script: string }[];
}

export class ApiError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`service error ${status}: ${JSON.stringify(detail)}`);
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class CadClient {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, data);
    }
    return data as T;
  }

  createSession(backend: string, kind: string, target?: ModelPayload) {
    return this.call<{ id: string; backend: string; kind: string }>(
      "POST",
      "/session",
      target ? { backend, kind, target } : { backend, kind },
    );
  }

  turn(sessionId: string, instruction: string, script?: ScriptRecord) {
    const body: Record<string, unknown> = { instruction };
    if (script) body.script = script;
    return this.call<TurnResult>("POST", `/session/${sessionId}/turn`, body);
  }

  undo(sessionId: string) {
    return this.call<TurnResult>("POST", `/session/${sessionId}/undo`);
  }

  getSession(sessionId: string) {
    return this.call<SessionInfo>("GET", `/session/${sessionId}`);
  }

  convert(text: string, fromKind: string, toKind: string) {
    return this.call<{ text: string }>("POST", "/convert", {
      text,
      from_kind: fromKind,
      to_kind: toKind,
    });
  }
}
