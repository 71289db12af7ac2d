// Pure logic behind the scroll-down configuration form: turn form state into
// the exact plan document the CLI would submit, and mirror the server-side
// validation messages inline before anything is posted.

import { ModalityConfig, PlanDocument } from "./types.js";

export interface ModalityRow {
  name: string;
  intervalMs: string;
  device: string;
}

export interface FormState {
  address: string;
  durationMs: string;
  gridStartHz: string;
  gridStopHz: string;
  gridPoints: string;
  mode: "sequential" | "parallel";
  modalities: ModalityRow[];
  sequentialIntervalMs: string;
  sweepSequenceJson: string; // e.g. {"0": ["TX1","RX1"], ...}; empty = none
  pinMapJson: string;
  peripheralsJson: string;
  seed: string;
  /** From the service capabilities, seconds; null if unknown. */
  minSweepTimeS: number | null;
}

export interface FieldError {
  field: string;
  message: string;
}

export const DEFAULT_FORM: FormState = {
  address: "sim:loop",
  durationMs: "10000",
  gridStartHz: "34e6",
  gridStopHz: "34e6",
  gridPoints: "1",
  mode: "parallel",
  modalities: [
    { name: "s21", intervalMs: "100", device: "vna" },
    { name: "flux", intervalMs: "50", device: "hall" },
  ],
  sequentialIntervalMs: "1000",
  sweepSequenceJson: "",
  pinMapJson: "",
  peripheralsJson: JSON.stringify(
    {
      hall: { enable: true, module: "mpada.sim_peripherals", object: "SimHall", label: "hall ground truth" },
    },
    null,
    2,
  ),
  seed: "",
  minSweepTimeS: null,
};

function num(value: string): number | null {
  if (value.trim() === "") return null;
  const n = Number(value);
  return Number.isFinite(n) ? n : null;
}

function parseJsonField(value: string): Record<string, unknown> | null {
  const parsed = JSON.parse(value);
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    return null;
  }
  return parsed as Record<string, unknown>;
}

export function validateForm(state: FormState): FieldError[] {
  const errors: FieldError[] = [];
  if (state.address.trim() === "") {
    errors.push({ field: "address", message: "instrument address is required" });
  }
  const duration = num(state.durationMs);
  if (duration === null || duration <= 0) {
    errors.push({ field: "durationMs", message: "duration must be a positive number of ms" });
  }
  const start = num(state.gridStartHz);
  const stop = num(state.gridStopHz);
  const points = num(state.gridPoints);
  if (start === null || stop === null || points === null) {
    errors.push({ field: "grid", message: "grid needs numeric start, stop and point count" });
  } else if (!Number.isInteger(points) || points < 1) {
    errors.push({ field: "grid", message: "point count must be an integer >= 1" });
  } else if (points === 1 ? start !== stop : start >= stop) {
    errors.push({
      field: "grid",
      message: points === 1 ? "a single-point grid needs start == stop" : "start must be below stop",
    });
  }
  if (state.mode === "parallel") {
    if (state.modalities.length === 0) {
      errors.push({ field: "modalities", message: "parallel mode needs at least one modality" });
    }
    const seen = new Set<string>();
    for (const row of state.modalities) {
      if (row.name.trim() === "" || row.device.trim() === "") {
        errors.push({ field: "modalities", message: "every modality needs a name and a device" });
        continue;
      }
      if (seen.has(row.name)) {
        errors.push({ field: "modalities", message: `duplicate modality name '${row.name}'` });
      }
      seen.add(row.name);
      const interval = num(row.intervalMs);
      if (interval === null || interval <= 0) {
        errors.push({ field: "modalities", message: `modality '${row.name}': interval must be positive` });
      } else if (
        row.device === "vna" &&
        state.minSweepTimeS !== null &&
        interval < state.minSweepTimeS * 1000
      ) {
        errors.push({
          field: "modalities",
          message:
            `modality '${row.name}': sampling interval ${interval} ms is below the minimum ` +
            `achievable sweep time ${state.minSweepTimeS * 1000} ms`,
        });
      }
    }
  } else {
    const interval = num(state.sequentialIntervalMs);
    if (interval === null || interval <= 0) {
      errors.push({ field: "sequentialIntervalMs", message: "cycle interval must be positive" });
    }
  }
  for (const [field, value] of [
    ["sweepSequenceJson", state.sweepSequenceJson],
    ["pinMapJson", state.pinMapJson],
    ["peripheralsJson", state.peripheralsJson],
  ] as const) {
    if (value.trim() === "") continue;
    try {
      if (parseJsonField(value) === null) {
        errors.push({ field, message: "must be a JSON object" });
      }
    } catch {
      errors.push({ field, message: "not valid JSON" });
    }
  }
  if (state.seed.trim() !== "" && !Number.isInteger(num(state.seed))) {
    errors.push({ field: "seed", message: "seed must be an integer" });
  }
  return errors;
}

/** Build the plan JSON. Call only when validateForm returns no errors. */
export function buildPlanDocument(state: FormState): PlanDocument {
  const doc: PlanDocument = {
    mode: state.mode,
    address: state.address.trim(),
    duration_ms: Number(state.durationMs),
    grid: {
      start_hz: Number(state.gridStartHz),
      stop_hz: Number(state.gridStopHz),
      n_points: Number(state.gridPoints),
    },
  };
  if (state.mode === "parallel") {
    const modalities: Record<string, ModalityConfig> = {};
    for (const row of state.modalities) {
      modalities[row.name] = { interval_ms: Number(row.intervalMs), device: row.device };
    }
    doc.modalities = modalities;
  } else {
    doc.interval_ms = Number(state.sequentialIntervalMs);
    doc.cycle = { sweep: "all" };
  }
  if (state.sweepSequenceJson.trim() !== "") {
    doc.sweep_sequence = JSON.parse(state.sweepSequenceJson);
  }
  if (state.pinMapJson.trim() !== "") {
    doc.pin_map = JSON.parse(state.pinMapJson);
  }
  if (state.peripheralsJson.trim() !== "") {
    doc.peripherals = JSON.parse(state.peripheralsJson);
  }
  if (state.seed.trim() !== "") {
    doc.seed = Number(state.seed);
  }
  return doc;
}

/** True when the review step should allow submission. */
export function canSubmit(state: FormState): boolean {
  return validateForm(state).length === 0;
}
