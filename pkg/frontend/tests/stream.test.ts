import { describe, expect, it, vi } from "vitest";

import { EventSourceLike, SampleStream, StreamStatus } from "../src/stream.js";
import { StreamEvent } from "../src/types.js";

class FakeEventSource implements EventSourceLike {
  onopen: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  closed = false;
  private listeners = new Map<string, (ev: { data: string }) => void>();

  addEventListener(type: string, listener: (ev: { data: string }) => void): void {
    this.listeners.set(type, listener);
  }

  close(): void {
    this.closed = true;
  }

  emitOpen(): void {
    this.onopen?.({});
  }

  emitMessage(data: unknown): void {
    this.onmessage?.({ data: JSON.stringify(data) });
  }

  emitNamed(type: string, data = "{}"): void {
    this.listeners.get(type)?.({ data });
  }

  emitError(): void {
    this.onerror?.({});
  }
}

function harness() {
  const sources: FakeEventSource[] = [];
  const events: StreamEvent[] = [];
  const statuses: StreamStatus[] = [];
  const stream = new SampleStream(
    "/api/sessions/x/stream",
    {
      onEvent: (e) => events.push(e),
      onStatus: (s) => statuses.push(s),
    },
    () => {
      const src = new FakeEventSource();
      sources.push(src);
      return src;
    },
    10,
  );
  return { stream, sources, events, statuses };
}

describe("SampleStream", () => {
  it("forwards parsed events and reports live status", () => {
    const { stream, sources, events, statuses } = harness();
    stream.open();
    sources[0].emitOpen();
    sources[0].emitMessage({ t_ms: 1, modality: "flux", kind: "flux", bx: 1, by: 0, bz: 0 });
    sources[0].emitMessage("garbage");
    expect(statuses).toEqual(["connecting", "live"]);
    expect(events).toHaveLength(1);
    expect(events[0].modality).toBe("flux");
  });

  it("ends on the terminal event and closes the source", () => {
    const { stream, sources, statuses } = harness();
    stream.open();
    sources[0].emitOpen();
    sources[0].emitNamed("end");
    expect(statuses.at(-1)).toBe("ended");
    expect(sources[0].closed).toBe(true);
  });

  it("reconnects after a drop with a visible status", async () => {
    vi.useFakeTimers();
    try {
      const { stream, sources, statuses } = harness();
      stream.open();
      sources[0].emitOpen();
      sources[0].emitError();
      expect(statuses.at(-1)).toBe("reconnecting");
      expect(sources[0].closed).toBe(true);
      await vi.advanceTimersByTimeAsync(20);
      expect(sources).toHaveLength(2);
      sources[1].emitOpen();
      expect(statuses.at(-1)).toBe("live");
      stream.close();
    } finally {
      vi.useRealTimers();
    }
  });

  it("does not reconnect after end", async () => {
    vi.useFakeTimers();
    try {
      const { stream, sources } = harness();
      stream.open();
      sources[0].emitNamed("end");
      sources[0].emitError();
      await vi.advanceTimersByTimeAsync(50);
      expect(sources).toHaveLength(1);
    } finally {
      vi.useRealTimers();
    }
  });
});
