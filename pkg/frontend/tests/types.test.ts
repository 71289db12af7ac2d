import { describe, expect, it } from "vitest";

import { parseStreamEvent } from "../src/types.js";

describe("parseStreamEvent", () => {
  it("parses a flux event", () => {
    const ev = parseStreamEvent(
      JSON.stringify({ t_ms: 1.5, modality: "flux", kind: "flux", bx: 1, by: 0, bz: 0.2, theta_deg: 0 }),
    );
    expect(ev).not.toBeNull();
    expect(ev!.kind).toBe("flux");
    expect(ev!.t_ms).toBe(1.5);
  });

  it("parses a trace event with arrays", () => {
    const ev = parseStreamEvent(
      JSON.stringify({
        t_ms: 2,
        modality: "s21",
        kind: "trace",
        step_id: null,
        tx: "TX1",
        rx: "RX1",
        f_hz: [34e6],
        mag: [0.7],
      }),
    );
    expect(ev!.kind).toBe("trace");
    if (ev!.kind === "trace") {
      expect(ev!.mag).toEqual([0.7]);
    }
  });

  it("rejects malformed payloads", () => {
    expect(parseStreamEvent("not json")).toBeNull();
    expect(parseStreamEvent("42")).toBeNull();
    expect(parseStreamEvent("{}")).toBeNull();
    expect(parseStreamEvent(JSON.stringify({ t_ms: "x", modality: "m", kind: "flux" }))).toBeNull();
    expect(parseStreamEvent(JSON.stringify({ t_ms: 1, modality: "m", kind: "mystery" }))).toBeNull();
  });
});
