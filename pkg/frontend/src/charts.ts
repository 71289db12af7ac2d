// Canvas chart rendering: a dual-axis time-series chart for scalar
// modalities and a magnitude-vs-frequency chart for the latest trace. The
// UI plots values exactly as streamed; the only transform is axis scaling.

export interface Point {
  x: number;
  y: number;
}

export interface AxisScale {
  min: number;
  max: number;
}

/** Pad a data range so flat series still get a visible band. */
export function axisScale(values: number[], padFraction = 0.05): AxisScale {
  if (values.length === 0) return { min: 0, max: 1 };
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    const pad = min === 0 ? 1 : Math.abs(min) * 0.1;
    return { min: min - pad, max: max + pad };
  }
  const pad = (max - min) * padFraction;
  return { min: min - pad, max: max + pad };
}

/** Map a value into pixel space (y axes are inverted by the caller). */
export function scaleTo(value: number, scale: AxisScale, pixels: number): number {
  return ((value - scale.min) / (scale.max - scale.min)) * pixels;
}

/** Round tick labels to a sensible precision for the given span. */
export function tickLabel(value: number, span: number): string {
  if (span === 0) return value.toString();
  const digits = Math.max(0, 2 - Math.floor(Math.log10(Math.abs(span))));
  return value.toFixed(Math.min(digits, 6));
}

export interface Series {
  label: string;
  color: string;
  points: readonly Point[];
}

const MARGIN = { left: 48, right: 48, top: 12, bottom: 24 };

function plotArea(canvas: HTMLCanvasElement) {
  return {
    width: canvas.width - MARGIN.left - MARGIN.right,
    height: canvas.height - MARGIN.top - MARGIN.bottom,
  };
}

function drawAxisLabels(
  ctx: CanvasRenderingContext2D,
  scale: AxisScale,
  x: number,
  align: CanvasTextAlign,
  color: string,
  height: number,
): void {
  ctx.fillStyle = color;
  ctx.textAlign = align;
  ctx.textBaseline = "middle";
  const span = scale.max - scale.min;
  for (const frac of [0, 0.5, 1]) {
    const value = scale.min + span * frac;
    const y = MARGIN.top + height - scaleTo(value, scale, height);
    ctx.fillText(tickLabel(value, span), x, y);
  }
}

function drawSeries(
  ctx: CanvasRenderingContext2D,
  series: Series,
  xScale: AxisScale,
  yScale: AxisScale,
  width: number,
  height: number,
): void {
  if (series.points.length === 0) return;
  ctx.strokeStyle = series.color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  series.points.forEach((p, i) => {
    const px = MARGIN.left + scaleTo(p.x, xScale, width);
    const py = MARGIN.top + height - scaleTo(p.y, yScale, height);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

/** Two series on a shared time axis with independent left/right y axes. */
export function drawDualAxis(canvas: HTMLCanvasElement, left: Series, right: Series): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = plotArea(canvas);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px sans-serif";

  const allX = [...left.points, ...right.points].map((p) => p.x);
  if (allX.length === 0) return;
  const xScale = axisScale(allX, 0);
  const leftScale = axisScale(left.points.map((p) => p.y));
  const rightScale = axisScale(right.points.map((p) => p.y));

  ctx.strokeStyle = "#444";
  ctx.strokeRect(MARGIN.left, MARGIN.top, width, height);
  drawAxisLabels(ctx, leftScale, MARGIN.left - 4, "right", left.color, height);
  drawAxisLabels(ctx, rightScale, MARGIN.left + width + 4, "left", right.color, height);
  drawSeries(ctx, left, xScale, leftScale, width, height);
  drawSeries(ctx, right, xScale, rightScale, width, height);
}

/** Latest-trace |S21| versus frequency. */
export function drawTrace(canvas: HTMLCanvasElement, fHz: number[], mag: number[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = plotArea(canvas);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px sans-serif";
  if (fHz.length === 0) return;

  const points = fHz.map((f, i) => ({ x: f, y: mag[i] }));
  const xScale = axisScale(fHz, 0);
  const yScale = axisScale(mag);
  ctx.strokeStyle = "#444";
  ctx.strokeRect(MARGIN.left, MARGIN.top, width, height);
  drawAxisLabels(ctx, yScale, MARGIN.left - 4, "right", "#ccc", height);
  drawSeries(ctx, { label: "|S21|", color: "#4ea1ff", points }, xScale, yScale, width, height);
}
