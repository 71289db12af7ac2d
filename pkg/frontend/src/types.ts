// Shapes exchanged with the acquisition service API.

export interface GridConfig {
  start_hz: number;
  stop_hz: number;
  n_points: number;
}

export interface ModalityConfig {
  interval_ms: number;
  device: string;
  args?: Record<string, unknown>;
}

export interface PlanDocument {
  mode: "sequential" | "parallel";
  address: string;
  duration_ms: number;
  grid?: GridConfig;
  pin_map?: Record<string, string[]>;
  sweep_sequence?: Record<string, [string, string]>;
  modalities?: Record<string, ModalityConfig>;
  interval_ms?: number;
  cycle?: Record<string, unknown>;
  peripherals?: Record<string, unknown>;
  seed?: number;
}

export interface SessionView {
  id: string;
  state: "idle" | "running" | "complete" | "aborted";
  partial: boolean;
  plan: {
    mode: string;
    duration_ms: number;
    intervals_ms: Record<string, number>;
  };
  sample_counts: Record<string, number>;
  last_sample_t_ms: Record<string, number>;
}

interface StreamEventBase {
  t_ms: number;
  modality: string;
}

export interface TraceEvent extends StreamEventBase {
  kind: "trace";
  step_id: string | null;
  tx: string;
  rx: string;
  f_hz: number[];
  mag: number[];
}

export interface FluxEvent extends StreamEventBase {
  kind: "flux";
  bx: number;
  by: number;
  bz: number;
  theta_deg?: number;
}

export interface AngleEvent extends StreamEventBase {
  kind: "angle";
  theta_deg: number;
}

export interface ActuationEvent extends StreamEventBase {
  kind: "actuation";
  event: string;
  position: number;
}

export interface GapEvent extends StreamEventBase {
  kind: "gap";
  missed_ticks: number;
}

export interface ErrorEvent extends StreamEventBase {
  kind: "error";
  message: string;
}

export type StreamEvent =
  | TraceEvent
  | FluxEvent
  | AngleEvent
  | ActuationEvent
  | GapEvent
  | ErrorEvent;

const KINDS = new Set(["trace", "flux", "angle", "actuation", "gap", "error"]);

/** Parse one SSE data payload into a typed event, or null if unrecognized. */
export function parseStreamEvent(json: string): StreamEvent | null {
  let raw: unknown;
  try {
    raw = JSON.parse(json);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const ev = raw as Record<string, unknown>;
  if (typeof ev.t_ms !== "number" || typeof ev.modality !== "string") return null;
  if (typeof ev.kind !== "string" || !KINDS.has(ev.kind)) return null;
  return ev as unknown as StreamEvent;
}
