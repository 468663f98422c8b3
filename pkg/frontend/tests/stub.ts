/** Fetch stub that replays wire fixtures captured from the real service. */

import fixtures from "./fixtures.json";

import type { FetchLike } from "../src/api";

export interface FixtureCall {
  method: string;
  path: string;
  request: unknown;
  status: number;
  response: unknown;
}

export interface FixtureSet {
  session_id: string;
  calls: FixtureCall[];
}

export const FIXTURES = fixtures as unknown as FixtureSet;

export class ReplayServer {
  calls: FixtureCall[];
  cursor = 0;
  seen: { method: string; path: string; body: unknown }[] = [];

  constructor(calls: FixtureCall[]) {
    this.calls = calls;
  }

  get fetch(): FetchLike {
    return async (input: string, init?: RequestInit) => {
      const url = new URL(input, "http://stub");
      const method = (init?.method ?? "GET").toUpperCase();
      const body = init?.body ? JSON.parse(init.body as string) : undefined;
      this.seen.push({ method, path: url.pathname, body });
      const expected = this.calls[this.cursor];
      if (!expected) {
        throw new Error(`unexpected extra call ${method} ${url.pathname}`);
      }
      if (expected.method !== method || expected.path !== url.pathname) {
        throw new Error(
          `call ${this.cursor}: got ${method} ${url.pathname}, ` +
            `fixture has ${expected.method} ${expected.path}`,
        );
      }
      this.cursor += 1;
      return new Response(JSON.stringify(expected.response), {
        status: expected.status,
        headers: { "Content-Type": "application/json" },
      });
    };
  }

  done(): boolean {
    return this.cursor === this.calls.length;
  }
}

/** Simple programmable stub for state-machine tests. */
export class ManualStub {
  handlers: Array<(path: string, body: unknown) => { status: number; body: unknown }> = [];
  pendingResolvers: Array<() => void> = [];

  get fetch(): FetchLike {
    return async (input: string, init?: RequestInit) => {
      const url = new URL(input, "http://stub");
      const body = init?.body ? JSON.parse(init.body as string) : undefined;
      const handler = this.handlers.shift();
      if (!handler) throw new Error(`no handler for ${url.pathname}`);
      const result = handler(url.pathname, body);
      return new Response(JSON.stringify(result.body), {
        status: result.status,
        headers: { "Content-Type": "application/json" },
      });
    };
  }
}
