import {
  Envelope,
  EnvelopeSchema,
  ExperimentKind,
  Health,
  HealthSchema,
  LabSnapshot,
  LabSnapshotSchema,
  MoveResult,
  MoveResultSchema,
  RunRef,
  RunRefSchema,
  RunSnapshot,
  RunSnapshotSchema,
  StagePos,
  SweetSpotOutcome,
  SweetSpotOutcomeSchema,
} from "./schema.js";

/** Service-reported failure (limit breach, unknown verb, read-only, ...). */
export class ApiError extends Error {
  constructor(
    public readonly type: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin request/response client for the lab service envelope protocol.
 *
 * Every call POSTs one `{id, verb, payload}` message and validates the echoed
 * envelope. The client holds no lab state; mutations happen only on the
 * service side and come back as fresh snapshots.
 */
export class LabClient {
  private nextId = 1;
  private readonly fetchImpl: FetchLike;

  constructor(
    public readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async call(verb: string, payload: object = {}): Promise<Envelope> {
    const id = this.nextId++;
    const res = await this.fetchImpl(`${this.baseUrl}/api`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ id, verb, payload }),
    });
    const body = EnvelopeSchema.parse(await res.json());
    if (body.id !== id) {
      throw new Error(`response id ${String(body.id)} does not match request ${id}`);
    }
    if (!body.ok) {
      throw new ApiError(body.error.type, body.error.message, res.status);
    }
    return body;
  }

  private async payload(verb: string, payload: object = {}): Promise<Record<string, unknown>> {
    const env = await this.call(verb, payload);
    // call() throws on ok:false, so the payload branch is the only one left
    return (env as Extract<Envelope, { ok: true }>).payload;
  }

  async health(): Promise<Health> {
    const res = await this.fetchImpl(`${this.baseUrl}/health`);
    return HealthSchema.parse(await res.json());
  }

  async getState(): Promise<LabSnapshot> {
    return LabSnapshotSchema.parse(await this.payload("get_state"));
  }

  async moveStage(pos: StagePos, compensated = false): Promise<MoveResult> {
    return MoveResultSchema.parse(
      await this.payload("move_stage", { ...pos, compensated }),
    );
  }

  async setSolenoid(tesla: number): Promise<LabSnapshot> {
    return LabSnapshotSchema.parse(await this.payload("set_solenoid", { tesla }));
  }

  async runExperiment(kind: ExperimentKind, params: object = {}): Promise<RunRef> {
    return RunRefSchema.parse(await this.payload("run_experiment", { kind, params }));
  }

  async findSweetSpot(
    range: [number, number],
    budget = 60,
    shots = 300,
  ): Promise<SweetSpotOutcome> {
    return SweetSpotOutcomeSchema.parse(
      await this.payload("find_sweet_spot", { range, budget, shots }),
    );
  }

  async getRun(runId: string): Promise<RunSnapshot> {
    return RunSnapshotSchema.parse(await this.payload("get_run", { run_id: runId }));
  }
}
