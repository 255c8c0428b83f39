import { LabSnapshot, StagePos, SweetSpotOutcome, TracePoint } from "./api/schema.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface ActiveRun {
  runId: string;
  kind: string;
  /** Append-only, in stream seq order; the trace pane draws this verbatim. */
  points: TracePoint[];
  fits: Record<string, unknown> | null;
  done: boolean;
  error: string | null;
  warning: string | null;
}

export interface PinnedTrace {
  runId: string;
  label: string;
  position: StagePos;
  solenoidT: number;
  points: TracePoint[];
  /** Service-fitted resonance center; null if the fit found no peak. */
  fLHz: number | null;
  /** Service-fitted linewidth of the strongest peak. */
  widthHz: number | null;
}

export interface AssistantState {
  running: boolean;
  result: SweetSpotOutcome | null;
  error: string | null;
}

export interface ConsoleState {
  status: ConnectionStatus;
  snapshot: LabSnapshot | null;
  jogStepMm: number;
  compensated: boolean;
  /** True from jog issue until the move acknowledgment; jog controls lock. */
  jogBusy: boolean;
  lastAckMs: number | null;
  /** Service-side rejection of the last control action, rendered inline. */
  controlError: string | null;
  run: ActiveRun | null;
  pinned: PinnedTrace[];
  assistant: AssistantState;
}

export function initialState(): ConsoleState {
  return {
    status: "disconnected",
    snapshot: null,
    jogStepMm: 1,
    compensated: false,
    jogBusy: false,
    lastAckMs: null,
    controlError: null,
    run: null,
    pinned: [],
    assistant: { running: false, result: null, error: null },
  };
}

type Listener = (state: ConsoleState) => void;

/** Single mutable console state with change notification, no framework. */
export class Store {
  private listeners: Listener[] = [];

  constructor(public readonly state: ConsoleState = initialState()) {}

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  update(mutate: (state: ConsoleState) => void): void {
    mutate(this.state);
    for (const fn of this.listeners) fn(this.state);
  }
}
