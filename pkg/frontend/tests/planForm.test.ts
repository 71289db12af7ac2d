import { describe, expect, it } from "vitest";

import {
  buildPlanDocument,
  canSubmit,
  DEFAULT_FORM,
  FormState,
  validateForm,
} from "../src/planForm.js";

function form(overrides: Partial<FormState> = {}): FormState {
  return { ...structuredClone(DEFAULT_FORM), ...overrides };
}

describe("validateForm", () => {
  it("accepts the defaults", () => {
    expect(validateForm(form())).toEqual([]);
    expect(canSubmit(form())).toBe(true);
  });

  it("requires an address and a positive duration", () => {
    const errors = validateForm(form({ address: " ", durationMs: "-5" }));
    const fields = errors.map((e) => e.field);
    expect(fields).toContain("address");
    expect(fields).toContain("durationMs");
  });

  it("checks the frequency grid", () => {
    expect(validateForm(form({ gridPoints: "0" }))[0].message).toMatch(/integer/);
    expect(
      validateForm(form({ gridStartHz: "2e7", gridStopHz: "1e7", gridPoints: "5" }))[0].message,
    ).toMatch(/below stop/);
    expect(validateForm(form({ gridStopHz: "35e6" }))[0].message).toMatch(/start == stop/);
  });

  it("needs at least one modality in parallel mode", () => {
    const errors = validateForm(form({ modalities: [] }));
    expect(errors[0].message).toMatch(/at least one modality/);
  });

  it("rejects duplicate modality names", () => {
    const rows = [
      { name: "a", intervalMs: "100", device: "vna" },
      { name: "a", intervalMs: "50", device: "hall" },
    ];
    expect(validateForm(form({ modalities: rows }))[0].message).toMatch(/duplicate/);
  });

  it("mirrors the minimum-sweep-time constraint inline", () => {
    const errors = validateForm(
      form({
        minSweepTimeS: 0.02,
        modalities: [{ name: "s21", intervalMs: "5", device: "vna" }],
      }),
    );
    expect(errors).toHaveLength(1);
    expect(errors[0].message).toMatch(/below the minimum/);
    expect(errors[0].message).toMatch(/sweep time/);
  });

  it("does not apply the sweep-time constraint to non-VNA devices", () => {
    const errors = validateForm(
      form({
        minSweepTimeS: 0.02,
        modalities: [{ name: "flux", intervalMs: "5", device: "hall" }],
      }),
    );
    expect(errors).toEqual([]);
  });

  it("flags malformed JSON fields", () => {
    expect(validateForm(form({ pinMapJson: "{nope" }))[0].message).toMatch(/not valid JSON/);
    expect(validateForm(form({ sweepSequenceJson: "[1,2]" }))[0].message).toMatch(/JSON object/);
  });

  it("validates sequential cycle interval instead of modalities", () => {
    const errors = validateForm(
      form({ mode: "sequential", modalities: [], sequentialIntervalMs: "0" }),
    );
    expect(errors).toHaveLength(1);
    expect(errors[0].field).toBe("sequentialIntervalMs");
  });
});

describe("buildPlanDocument", () => {
  it("produces the same document the CLI would submit for the defaults", () => {
    const doc = buildPlanDocument(form());
    expect(doc).toEqual({
      mode: "parallel",
      address: "sim:loop",
      duration_ms: 10000,
      grid: { start_hz: 34e6, stop_hz: 34e6, n_points: 1 },
      modalities: {
        s21: { interval_ms: 100, device: "vna" },
        flux: { interval_ms: 50, device: "hall" },
      },
      peripherals: {
        hall: {
          enable: true,
          module: "mpada.sim_peripherals",
          object: "SimHall",
          label: "hall ground truth",
        },
      },
    });
  });

  it("serializes sequential plans with a cycle", () => {
    const doc = buildPlanDocument(
      form({ mode: "sequential", sequentialIntervalMs: "250", peripheralsJson: "" }),
    );
    expect(doc.interval_ms).toBe(250);
    expect(doc.cycle).toEqual({ sweep: "all" });
    expect(doc.modalities).toBeUndefined();
    expect(doc.peripherals).toBeUndefined();
  });

  it("passes optional JSON sections through verbatim", () => {
    const doc = buildPlanDocument(
      form({
        sweepSequenceJson: '{"0": ["TX1", "RX1"]}',
        pinMapJson: '{"TX1": [], "RX1": []}',
        seed: "7",
      }),
    );
    expect(doc.sweep_sequence).toEqual({ "0": ["TX1", "RX1"] });
    expect(doc.pin_map).toEqual({ TX1: [], RX1: [] });
    expect(doc.seed).toBe(7);
  });

  it("round trips through JSON unchanged (replayable via CLI)", () => {
    const doc = buildPlanDocument(form());
    expect(JSON.parse(JSON.stringify(doc))).toEqual(doc);
  });
});
