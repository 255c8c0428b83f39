import { TracePoint } from "../api/schema.js";

export interface TraceSeries {
  points: TracePoint[];
  color: string;
}

// Hand-rolled canvas trace plot: sweep value on x, blockade probability on y.
// Kept dependency-free so the page loads as plain ES modules.

const PAD = { left: 46, right: 10, top: 8, bottom: 22 };

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}

export function drawTrace(
  canvas: HTMLCanvasElement,
  series: TraceSeries[],
  markerX: number | null = null,
): void {
  const ctx = canvas.getContext ? canvas.getContext("2d") : null;
  if (!ctx) return; // headless DOM: rendering is asserted via the text model
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, w, h);

  const all = series.flatMap((s) => s.points);
  if (all.length === 0) return;
  const [x0, x1] = extent(all.map((p) => p.sweep_value));
  const [yLoRaw, yHiRaw] = extent(all.map((p) => p.p_blockade));
  const yPad = (yHiRaw - yLoRaw) * 0.08;
  const y0 = yLoRaw - yPad;
  const y1 = yHiRaw + yPad;

  const px = (x: number) => PAD.left + ((x - x0) / (x1 - x0)) * (w - PAD.left - PAD.right);
  const py = (y: number) => h - PAD.bottom - ((y - y0) / (y1 - y0)) * (h - PAD.top - PAD.bottom);

  ctx.strokeStyle = "#94a3b8";
  ctx.lineWidth = 1;
  ctx.strokeRect(PAD.left, PAD.top, w - PAD.left - PAD.right, h - PAD.top - PAD.bottom);

  ctx.fillStyle = "#475569";
  ctx.font = "10px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(y1.toFixed(2), 4, PAD.top + 10);
  ctx.fillText(y0.toFixed(2), 4, h - PAD.bottom);
  ctx.fillText(axisNumber(x0), PAD.left, h - 6);
  ctx.textAlign = "right";
  ctx.fillText(axisNumber(x1), w - PAD.right, h - 6);

  for (const s of series) {
    if (s.points.length === 0) continue;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    s.points.forEach((p, i) => {
      const x = px(p.sweep_value);
      const y = py(p.p_blockade);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  if (markerX !== null && markerX >= x0 && markerX <= x1) {
    ctx.strokeStyle = "#dc2626";
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    ctx.moveTo(px(markerX), PAD.top);
    ctx.lineTo(px(markerX), h - PAD.bottom);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function axisNumber(v: number): string {
  const a = Math.abs(v);
  if (a >= 1e6) return `${(v / 1e6).toFixed(1)}M`;
  if (a >= 1e3) return `${(v / 1e3).toFixed(1)}k`;
  if (a > 0 && a < 1e-3) return v.toExponential(1);
  return v.toPrecision(3);
}
