import { SpectroscopyFits, SpectroscopyFitsSchema } from "../api/schema.js";
import { PinnedTrace } from "../state.js";

/**
 * Peak-shift readout between two pinned traces.
 *
 * Shift and linewidth both come from service-side fits; the only client
 * arithmetic is the difference and the ratio used for display.
 */
export interface PinComparison {
  a: PinnedTrace;
  b: PinnedTrace;
  shiftHz: number | null;
  /** Wider of the two fitted linewidths: the conservative resolution scale. */
  widthHz: number | null;
  shiftLinewidths: number | null;
}

export function comparePins(a: PinnedTrace, b: PinnedTrace): PinComparison {
  const shiftHz = a.fLHz !== null && b.fLHz !== null ? Math.abs(a.fLHz - b.fLHz) : null;
  const widths = [a.widthHz, b.widthHz].filter((w): w is number => w !== null && w > 0);
  const widthHz = widths.length > 0 ? Math.max(...widths) : null;
  const shiftLinewidths = shiftHz !== null && widthHz !== null ? shiftHz / widthHz : null;
  return { a, b, shiftHz, widthHz, shiftLinewidths };
}

/** Pull resonance center and linewidth out of a spectroscopy fit payload. */
export function resonanceSummary(
  fits: Record<string, unknown>,
): { fLHz: number | null; widthHz: number | null } {
  const parsed = SpectroscopyFitsSchema.safeParse(fits);
  if (!parsed.success) return { fLHz: null, widthHz: null };
  const f: SpectroscopyFits = parsed.data;
  const width = f.resonance.params["width_0"];
  return {
    fLHz: f.f_l_hz ?? null,
    widthHz: width !== undefined && width !== null ? Math.abs(width) : null,
  };
}

export interface BracketStep {
  /** Probe number, 1-based, in service execution order. */
  step: number;
  x: number;
  fLHz: number | null;
  bestX: number;
  /** Probed neighbors straddling the running best: the current bracket. */
  lo: number;
  hi: number;
}

/**
 * Replay a sweet-spot probe history into the shrinking bracket around the
 * running minimum, for the assistant's progress table. Probes whose peak
 * detection failed (null f_L) are listed but never drive the bracket.
 */
export function bracketSteps(probes: [number, number | null][]): BracketStep[] {
  const out: BracketStep[] = [];
  const measured: [number, number][] = [];
  for (let i = 0; i < probes.length; i++) {
    const probe = probes[i]!;
    if (probe[1] !== null) measured.push([probe[0], probe[1]]);
    if (measured.length === 0) continue;
    let best = measured[0]!;
    for (const p of measured) if (p[1] < best[1]) best = p;
    const xs = measured.map((p) => p[0]).sort((a, b) => a - b);
    const k = xs.indexOf(best[0]);
    out.push({
      step: i + 1,
      x: probe[0],
      fLHz: probe[1],
      bestX: best[0],
      lo: xs[Math.max(k - 1, 0)]!,
      hi: xs[Math.min(k + 1, xs.length - 1)]!,
    });
  }
  return out;
}
