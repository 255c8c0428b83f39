export function fmtMHz(hz: number | null | undefined, digits = 3): string {
  if (hz === null || hz === undefined) return "n/a";
  return `${(hz / 1e6).toFixed(digits)} MHz`;
}

export function fmtMm(mm: number): string {
  return `${mm.toFixed(2)} mm`;
}

export function fmtMs(ms: number | null): string {
  return ms === null ? "n/a" : `${ms.toFixed(0)} ms`;
}

export function fmtTesla(t: number): string {
  return `${(t * 1e3).toFixed(1)} mT`;
}

/** Sweep axis label by experiment kind. */
export function sweepLabel(kind: string): string {
  if (kind === "spectroscopy") return "drive frequency (Hz)";
  if (kind === "rb") return "sequence length";
  return "delay (s)";
}

export function fmtFitEntry(key: string, value: unknown): string | null {
  if (typeof value !== "number" || !Number.isFinite(value)) return null;
  if (key.endsWith("_hz")) return `${key} = ${fmtMHz(value)}`;
  if (key.endsWith("_s")) return `${key} = ${(value * 1e6).toFixed(2)} us`;
  return `${key} = ${value.toPrecision(5)}`;
}
