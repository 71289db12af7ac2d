import { ApiClient, ApiError } from "./api.js";
import { drawDualAxis, drawTrace, Point } from "./charts.js";
import {
  buildPlanDocument,
  canSubmit,
  DEFAULT_FORM,
  FormState,
  validateForm,
} from "./planForm.js";
import { RingBuffer } from "./ringBuffer.js";
import { SampleStream, StreamStatus } from "./stream.js";
import { SessionView, StreamEvent, TraceEvent } from "./types.js";

const RING_CAPACITY = 2000;
const api = new ApiClient();

const app = document.querySelector<HTMLDivElement>("#app")!;
app.innerHTML = `
  <h1>mpada operator console</h1>
  <div id="banner" class="banner" hidden></div>

  <section id="configure">
    <h2>1 &middot; Connection</h2>
    <label>Instrument address
      <input id="f-address" type="text" />
    </label>
    <label>Duration (ms)
      <input id="f-duration" type="text" />
    </label>

    <h2>2 &middot; Frequency grid</h2>
    <label>Start (Hz) <input id="f-grid-start" type="text" /></label>
    <label>Stop (Hz) <input id="f-grid-stop" type="text" /></label>
    <label>Points <input id="f-grid-points" type="text" /></label>

    <h2>3 &middot; Switch sequence</h2>
    <label>Sweep sequence (JSON, optional)
      <textarea id="f-sequence" rows="3" placeholder='{"0": ["TX1", "RX1"]}'></textarea>
    </label>
    <label>Pin map (JSON, optional)
      <textarea id="f-pinmap" rows="3" placeholder='{"TX1": [], "TX2": ["GP0"]}'></textarea>
    </label>

    <h2>4 &middot; Mode and intervals</h2>
    <label>Mode
      <select id="f-mode">
        <option value="parallel">parallel</option>
        <option value="sequential">sequential</option>
      </select>
    </label>
    <div id="modality-rows"></div>
    <button id="add-modality" type="button">Add modality</button>
    <label id="seq-interval-wrap" hidden>Cycle interval (ms)
      <input id="f-seq-interval" type="text" />
    </label>

    <h2>5 &middot; Peripherals</h2>
    <label>Registry (JSON, optional)
      <textarea id="f-peripherals" rows="5"></textarea>
    </label>
    <label>Simulator seed (optional) <input id="f-seed" type="text" /></label>

    <h2>6 &middot; Review &amp; submit</h2>
    <ul id="form-errors" class="errors"></ul>
    <pre id="plan-preview" class="preview"></pre>
    <button id="submit-plan" type="button">Submit plan</button>
  </section>

  <section id="session" hidden>
    <h2>Session <span id="session-id"></span></h2>
    <div class="controls">
      <span id="session-state" class="state"></span>
      <button id="btn-start" type="button">Start</button>
      <button id="btn-stop" type="button" disabled>Stop</button>
    </div>
    <h3>Scalar modalities</h3>
    <canvas id="chart-scalar" width="860" height="260"></canvas>
    <h3>Latest trace</h3>
    <canvas id="chart-trace" width="860" height="220"></canvas>
    <div id="downloads" class="controls" hidden>
      <a id="dl-csv" download>Download CSV</a>
      <a id="dl-s2p" download>Download s2p</a>
      <a id="dl-snapshot" download>Download snapshot</a>
    </div>
  </section>
`;

const el = <T extends HTMLElement>(id: string) => document.querySelector<T>(`#${id}`)!;

const state: FormState = structuredClone(DEFAULT_FORM);

function readForm(): void {
  state.address = el<HTMLInputElement>("f-address").value;
  state.durationMs = el<HTMLInputElement>("f-duration").value;
  state.gridStartHz = el<HTMLInputElement>("f-grid-start").value;
  state.gridStopHz = el<HTMLInputElement>("f-grid-stop").value;
  state.gridPoints = el<HTMLInputElement>("f-grid-points").value;
  state.mode = el<HTMLSelectElement>("f-mode").value as FormState["mode"];
  state.sweepSequenceJson = el<HTMLTextAreaElement>("f-sequence").value;
  state.pinMapJson = el<HTMLTextAreaElement>("f-pinmap").value;
  state.peripheralsJson = el<HTMLTextAreaElement>("f-peripherals").value;
  state.sequentialIntervalMs = el<HTMLInputElement>("f-seq-interval").value;
  state.seed = el<HTMLInputElement>("f-seed").value;
  state.modalities = [...document.querySelectorAll<HTMLDivElement>(".modality-row")].map(
    (row) => ({
      name: row.querySelector<HTMLInputElement>(".m-name")!.value,
      intervalMs: row.querySelector<HTMLInputElement>(".m-interval")!.value,
      device: row.querySelector<HTMLInputElement>(".m-device")!.value,
    }),
  );
}

function writeForm(): void {
  el<HTMLInputElement>("f-address").value = state.address;
  el<HTMLInputElement>("f-duration").value = state.durationMs;
  el<HTMLInputElement>("f-grid-start").value = state.gridStartHz;
  el<HTMLInputElement>("f-grid-stop").value = state.gridStopHz;
  el<HTMLInputElement>("f-grid-points").value = state.gridPoints;
  el<HTMLSelectElement>("f-mode").value = state.mode;
  el<HTMLTextAreaElement>("f-sequence").value = state.sweepSequenceJson;
  el<HTMLTextAreaElement>("f-pinmap").value = state.pinMapJson;
  el<HTMLTextAreaElement>("f-peripherals").value = state.peripheralsJson;
  el<HTMLInputElement>("f-seq-interval").value = state.sequentialIntervalMs;
  el<HTMLInputElement>("f-seed").value = state.seed;
  renderModalityRows();
}

function renderModalityRows(): void {
  const wrap = el<HTMLDivElement>("modality-rows");
  wrap.innerHTML = "";
  state.modalities.forEach((row, i) => {
    const div = document.createElement("div");
    div.className = "modality-row";
    div.innerHTML = `
      <input class="m-name" placeholder="name" value="${row.name}" />
      <input class="m-interval" placeholder="interval ms" value="${row.intervalMs}" />
      <input class="m-device" placeholder="device (vna or peripheral key)" value="${row.device}" />
      <button type="button" class="m-remove">&times;</button>
    `;
    div.querySelector<HTMLButtonElement>(".m-remove")!.addEventListener("click", () => {
      readForm();
      state.modalities.splice(i, 1);
      renderModalityRows();
      refreshReview();
    });
    div.querySelectorAll("input").forEach((input) =>
      input.addEventListener("input", () => {
        readForm();
        refreshReview();
      }),
    );
    wrap.appendChild(div);
  });
}

function refreshReview(): void {
  const errors = validateForm(state);
  const list = el<HTMLUListElement>("form-errors");
  list.innerHTML = errors
    .map((e) => `<li><strong>${e.field}</strong>: ${e.message}</li>`)
    .join("");
  el<HTMLButtonElement>("submit-plan").disabled = !canSubmit(state);
  el<HTMLPreElement>("plan-preview").textContent =
    errors.length === 0 ? JSON.stringify(buildPlanDocument(state), null, 2) : "";
  el<HTMLElement>("seq-interval-wrap").hidden = state.mode !== "sequential";
  el<HTMLDivElement>("modality-rows").hidden = state.mode !== "parallel";
  el<HTMLButtonElement>("add-modality").hidden = state.mode !== "parallel";
}

function showBanner(message: string, kind: "info" | "error"): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = message;
  banner.className = `banner ${kind}`;
  banner.hidden = false;
}

function hideBanner(): void {
  el<HTMLDivElement>("banner").hidden = true;
}

// ---------------------------------------------------------------- session

interface ScalarSeries {
  buffer: RingBuffer<Point>;
}

let sessionId: string | null = null;
let stream: SampleStream | null = null;
let latestTrace: TraceEvent | null = null;
let redrawQueued = false;
const scalarSeries = new Map<string, ScalarSeries>();

function scalarValue(event: StreamEvent): number | null {
  switch (event.kind) {
    case "flux":
      return event.theta_deg ?? null;
    case "angle":
      return event.theta_deg;
    case "trace":
      return event.mag.length === 1 ? event.mag[0] : null;
    default:
      return null;
  }
}

function onStreamEvent(event: StreamEvent): void {
  if (event.kind === "trace") {
    latestTrace = event;
  }
  const value = scalarValue(event);
  if (value !== null) {
    let series = scalarSeries.get(event.modality);
    if (!series) {
      series = { buffer: new RingBuffer<Point>(RING_CAPACITY) };
      scalarSeries.set(event.modality, series);
    }
    series.buffer.push({ x: event.t_ms, y: value });
  }
  queueRedraw();
}

function queueRedraw(): void {
  if (redrawQueued) return;
  redrawQueued = true;
  requestAnimationFrame(() => {
    redrawQueued = false;
    redraw();
  });
}

const SERIES_COLORS = ["#4ea1ff", "#ff6161", "#67d98b", "#e0b341"];

function redraw(): void {
  const names = [...scalarSeries.keys()].sort();
  const [a, b] = names;
  drawDualAxis(
    el<HTMLCanvasElement>("chart-scalar"),
    {
      label: a ?? "",
      color: SERIES_COLORS[0],
      points: a ? scalarSeries.get(a)!.buffer.toArray() : [],
    },
    {
      label: b ?? "",
      color: SERIES_COLORS[1],
      points: b ? scalarSeries.get(b)!.buffer.toArray() : [],
    },
  );
  if (latestTrace) {
    drawTrace(el<HTMLCanvasElement>("chart-trace"), latestTrace.f_hz, latestTrace.mag);
  }
}

function onStreamStatus(status: StreamStatus): void {
  if (status === "reconnecting") {
    showBanner("stream dropped — reconnecting…", "error");
  } else if (status === "live") {
    hideBanner();
  } else if (status === "ended") {
    hideBanner();
    void refreshSession();
  }
}

async function refreshSession(): Promise<void> {
  if (sessionId === null) return;
  const view: SessionView = await api.getSession(sessionId);
  el<HTMLSpanElement>("session-state").textContent = view.state + (view.partial ? " (partial)" : "");
  el<HTMLButtonElement>("btn-start").disabled = view.state !== "idle";
  el<HTMLButtonElement>("btn-stop").disabled = view.state !== "running";
  const done = view.state === "complete" || view.state === "aborted";
  el<HTMLDivElement>("downloads").hidden = !done;
  if (done) {
    el<HTMLAnchorElement>("dl-csv").href = api.exportUrl(sessionId, "csv");
    el<HTMLAnchorElement>("dl-s2p").href = api.exportUrl(sessionId, "s2p");
    el<HTMLAnchorElement>("dl-snapshot").href = api.exportUrl(sessionId, "snapshot");
  }
}

async function submitPlan(): Promise<void> {
  readForm();
  try {
    const { id } = await api.submitPlan(buildPlanDocument(state));
    sessionId = id;
    scalarSeries.clear();
    latestTrace = null;
    el<HTMLSpanElement>("session-id").textContent = id;
    el<HTMLElement>("session").hidden = false;
    hideBanner();
    await refreshSession();
    el<HTMLElement>("session").scrollIntoView({ behavior: "smooth" });
  } catch (err) {
    if (err instanceof ApiError && Array.isArray(err.detail)) {
      const list = el<HTMLUListElement>("form-errors");
      list.innerHTML = err.detail
        .map((v) => `<li><strong>server</strong>: ${v}</li>`)
        .join("");
    } else {
      showBanner(`submit failed: ${err}`, "error");
    }
  }
}

async function startSession(): Promise<void> {
  if (sessionId === null) return;
  try {
    await api.start(sessionId);
    stream?.close();
    stream = new SampleStream(api.streamUrl(sessionId), {
      onEvent: onStreamEvent,
      onStatus: onStreamStatus,
    });
    stream.open();
    await refreshSession();
  } catch (err) {
    showBanner(`start failed: ${err}`, "error");
  }
}

async function stopSession(): Promise<void> {
  if (sessionId === null) return;
  try {
    await api.stop(sessionId);
    await refreshSession();
  } catch (err) {
    showBanner(`stop failed: ${err}`, "error");
  }
}

// ---------------------------------------------------------------- wire-up

writeForm();
refreshReview();

for (const id of [
  "f-address",
  "f-duration",
  "f-grid-start",
  "f-grid-stop",
  "f-grid-points",
  "f-sequence",
  "f-pinmap",
  "f-peripherals",
  "f-seq-interval",
  "f-seed",
]) {
  el(id).addEventListener("input", () => {
    readForm();
    refreshReview();
  });
}
el<HTMLSelectElement>("f-mode").addEventListener("change", () => {
  readForm();
  refreshReview();
});
el<HTMLButtonElement>("add-modality").addEventListener("click", () => {
  readForm();
  state.modalities.push({ name: "", intervalMs: "100", device: "" });
  renderModalityRows();
  refreshReview();
});
el<HTMLButtonElement>("submit-plan").addEventListener("click", () => void submitPlan());
el<HTMLButtonElement>("btn-start").addEventListener("click", () => void startSession());
el<HTMLButtonElement>("btn-stop").addEventListener("click", () => void stopSession());
