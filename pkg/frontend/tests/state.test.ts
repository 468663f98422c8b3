import { describe, expect, it } from "vitest";

import { CadClient, TurnResult } from "../src/api";
import { SessionStore, describeError } from "../src/state";
import { ManualStub } from "./stub";

const MESH = { vertices: [0, 0, 0, 1, 0, 0, 0, 1, 0], triangles: [0, 1, 2], triangle_op: [0] };

function turnResult(overrides: Partial<TurnResult> = {}): TurnResult {
  return {
    turn_index: 0,
    instruction: "x",
    script: { actions: [], edited_ops_a: [], edited_ops_b: [] },
    model: { kind: "dsl", text: "cad v1\n" },
    mesh: MESH,
    edited_ops: [0],
    edited_flags: [true],
    reward: null,
    ...overrides,
  };
}

function makeStore(stub: ManualStub): SessionStore {
  return new SessionStore(new CadClient("http://stub", stub.fetch));
}

describe("session store", () => {
  it("rejects a second turn while one is in flight", async () => {
    const stub = new ManualStub();
    stub.handlers.push(() => ({ status: 200, body: { id: "s1", backend: "manual", kind: "dsl" } }));
    const store = makeStore(stub);
    await store.start();

    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const baseFetch = stub.fetch;
    // Delay only the turn requests; everything else passes straight through.
    (store as unknown as { client: CadClient }).client = new CadClient(
      "http://stub",
      async (input, init) => {
        if (input.includes("/turn")) await gate;
        return baseFetch(input, init);
      },
    );
    stub.handlers.push(() => ({ status: 200, body: turnResult() }));

    const first = store.submitTurn("one");
    const second = await store.submitTurn("two");
    expect(second).toBeNull();
    expect(store.state.banner).toContain("in flight");
    release();
    const result = await first;
    expect(result).not.toBeNull();
    expect(store.state.pending).toBe(false);
  });

  it("surfaces service errors as banners and re-enables input", async () => {
    const stub = new ManualStub();
    stub.handlers.push(() => ({ status: 200, body: { id: "s1", backend: "manual", kind: "dsl" } }));
    stub.handlers.push(() => ({
      status: 409,
      body: { error: "stale_old_value", detail: "expected 1.0" },
    }));
    const store = makeStore(stub);
    await store.start();
    const result = await store.submitTurn("conflict");
    expect(result).toBeNull();
    expect(store.state.banner).toContain("409");
    expect(store.state.pending).toBe(false);
    // Next turn goes through.
    stub.handlers.push(() => ({ status: 200, body: turnResult() }));
    const ok = await store.submitTurn("retry");
    expect(ok).not.toBeNull();
    expect(store.state.banner).toBeNull();
  });

  it("highlights come only from the latest turn's edited flags", async () => {
    const stub = new ManualStub();
    stub.handlers.push(() => ({ status: 200, body: { id: "s1", backend: "manual", kind: "dsl" } }));
    stub.handlers.push(() => ({
      status: 200,
      body: turnResult({ edited_flags: [false, true, true] }),
    }));
    const store = makeStore(stub);
    await store.start();
    await store.submitTurn("edit two ops");
    expect(store.state.highlighted).toEqual([1, 2]);
    stub.handlers.push(() => ({
      status: 200,
      body: turnResult({ edited_flags: [true, false, false] }),
    }));
    await store.submitTurn("edit first op");
    expect(store.state.highlighted).toEqual([0]);
  });

  it("export converts through the service when kinds differ", async () => {
    const stub = new ManualStub();
    stub.handlers.push(() => ({ status: 200, body: { id: "s1", backend: "manual", kind: "dsl" } }));
    stub.handlers.push(() => ({ status: 200, body: turnResult() }));
    const store = makeStore(stub);
    await store.start();
    await store.submitTurn("insert");
    expect(await store.exportModel("dsl")).toBe("cad v1\n");
    stub.handlers.push((path, body) => {
      expect(path).toBe("/convert");
      expect((body as { to_kind: string }).to_kind).toBe("st");
      return { status: 200, body: { text: "<model></model>\n" } };
    });
    expect(await store.exportModel("st")).toBe("<model></model>\n");
  });

  it("undo on a fresh session reports the error without crashing", async () => {
    const stub = new ManualStub();
    stub.handlers.push(() => ({ status: 200, body: { id: "s1", backend: "manual", kind: "dsl" } }));
    stub.handlers.push(() => ({ status: 400, body: { error: "empty_history", detail: "nothing" } }));
    const store = makeStore(stub);
    await store.start();
    const result = await store.undoTurn();
    expect(result).toBeNull();
    expect(store.state.banner).toContain("400");
  });

  it("describeError handles connection failures", () => {
    expect(describeError(new Error("boom"))).toContain("connection failed");
  });
});
