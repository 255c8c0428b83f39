import { z } from "zod";

// Wire types for the lab service. Every number shown in the UI is parsed
// through these schemas first, so a malformed message fails loudly instead
// of rendering garbage.

const num = z.number();
const int = z.number().int();
const pair = z.tuple([num, num]);

export const StagePosSchema = z.object({ x: num, y: num, z: num });
export type StagePos = z.infer<typeof StagePosSchema>;

export const LabSnapshotSchema = z.object({
  position: StagePosSchema,
  solenoid_t: num,
  qubit: z.string(),
  event_count: int,
  limits: z.object({ x: pair, y: pair, z: pair }),
  queue_depth: int,
  log_seq: int,
  active_runs: z.array(z.string()),
});
export type LabSnapshot = z.infer<typeof LabSnapshotSchema>;

export const MoveResultSchema = LabSnapshotSchema.extend({ queue_index: int });
export type MoveResult = z.infer<typeof MoveResultSchema>;

export const ErrorInfoSchema = z.object({ type: z.string(), message: z.string() });
export type ErrorInfo = z.infer<typeof ErrorInfoSchema>;

const requestId = z.union([z.string(), num]);

// ok:false still arrives with HTTP 200 for domain errors (limits, read-only);
// transport-level rejections (schema, unknown verb) use 4xx but the same shape.
export const EnvelopeSchema = z.union([
  z.object({
    id: requestId,
    verb: z.string(),
    ok: z.literal(true),
    payload: z.record(z.string(), z.unknown()),
    read_only: z.boolean(),
  }),
  z.object({
    id: requestId,
    verb: z.string(),
    ok: z.literal(false),
    error: ErrorInfoSchema,
    read_only: z.boolean(),
  }),
]);
export type Envelope = z.infer<typeof EnvelopeSchema>;

export const TracePointSchema = z.object({
  index: int,
  sweep_value: num,
  counts: int,
  shots: int,
  p_blockade: num,
});
export type TracePoint = z.infer<typeof TracePointSchema>;

// Failed fits report null, never NaN, so nullable throughout.
export const FitSummarySchema = z.object({
  model: z.string(),
  converged: z.boolean(),
  params: z.record(z.string(), num.nullable()),
  errors: z.record(z.string(), num.nullable()),
  residual_rms: num.nullable(),
});
export type FitSummary = z.infer<typeof FitSummarySchema>;

export const SpectroscopyFitsSchema = z.looseObject({
  resonance: FitSummarySchema,
  peaks: z.array(z.tuple([num.nullable(), num.nullable()])),
  f_l_hz: num.nullable().optional(),
});
export type SpectroscopyFits = z.infer<typeof SpectroscopyFitsSchema>;

// Stream messages carry seq from 1 with no gaps; the bare error form (no seq)
// is only sent when the socket targets an unknown run id.
export const StreamMessageSchema = z.union([
  z.object({
    run_id: z.string(),
    seq: int.positive(),
    type: z.enum(["point", "fit", "done", "error"]),
    payload: z.record(z.string(), z.unknown()),
  }),
  z.object({ type: z.literal("error"), payload: ErrorInfoSchema }),
]);
export type StreamMessage = z.infer<typeof StreamMessageSchema>;

export const RunRefSchema = z.object({ run_id: z.string(), stream: z.string() });
export type RunRef = z.infer<typeof RunRefSchema>;

export const SweetSpotOutcomeSchema = z.object({
  x_star: num,
  f_l_min_hz: num,
  residual_angle_deg: num,
  iterations: int,
  n_probes: int,
  // a probe whose peak detection failed reports null for f_L
  probes: z.array(z.tuple([num, num.nullable()])),
});
export type SweetSpotOutcome = z.infer<typeof SweetSpotOutcomeSchema>;

export const RunSnapshotSchema = z.object({
  run_id: z.string(),
  kind: z.string(),
  done: z.boolean(),
  n_messages: int,
  messages: z.array(z.unknown()),
});
export type RunSnapshot = z.infer<typeof RunSnapshotSchema>;

export const HealthSchema = z.object({ status: z.string(), read_only: z.boolean() });
export type Health = z.infer<typeof HealthSchema>;

export type ExperimentKind = "spectroscopy" | "rabi" | "ramsey" | "hahn" | "rb";

export const EXPERIMENT_KINDS: ExperimentKind[] = [
  "spectroscopy",
  "rabi",
  "ramsey",
  "hahn",
  "rb",
];
