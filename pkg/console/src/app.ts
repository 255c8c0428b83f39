import { ApiError, LabClient } from "./api/client.js";
import { ExperimentKind, StagePos } from "./api/schema.js";
import { RunSubscriber, SocketFactory, SocketLike } from "./api/stream.js";
import { resonanceSummary } from "./controllers/pins.js";
import { ActiveRun, Store } from "./state.js";

export type Axis = "x" | "y" | "z";

const defaultFactory: SocketFactory = (url) => {
  const Ctor = (globalThis as { WebSocket?: new (u: string) => unknown }).WebSocket;
  if (!Ctor) throw new Error("no WebSocket implementation; pass a socket factory");
  return new Ctor(url) as SocketLike;
};

function now(): number {
  return typeof performance !== "undefined" ? performance.now() : Date.now();
}

/**
 * Console controller: the only path from UI events to the lab service.
 *
 * Holds no physics state of its own; every field of the store's snapshot is
 * a verbatim service response, so reloading and re-fetching reproduces the
 * identical view.
 */
export class ConsoleApp {
  private subscriber: RunSubscriber | null = null;
  private runFinished: Promise<ActiveRun> | null = null;
  /** Stage position and solenoid at launch time, kept for pin labelling. */
  private launchContext = new Map<
    string,
    { position: StagePos; solenoidT: number } | null
  >();

  constructor(
    public readonly client: LabClient,
    public readonly wsBase: string,
    public readonly store: Store,
    private readonly socketFactory: SocketFactory = defaultFactory,
  ) {}

  async connect(): Promise<void> {
    this.store.update((s) => {
      s.status = "connecting";
    });
    try {
      const snap = await this.client.getState();
      this.store.update((s) => {
        s.status = "connected";
        s.snapshot = snap;
        s.controlError = null;
      });
    } catch (e) {
      this.store.update((s) => {
        s.status = "disconnected";
        s.controlError = e instanceof Error ? e.message : String(e);
      });
      throw e;
    }
  }

  async refresh(): Promise<void> {
    const snap = await this.client.getState();
    this.store.update((s) => {
      s.snapshot = snap;
    });
  }

  setJogStep(mm: number): void {
    this.store.update((s) => {
      s.jogStepMm = mm;
    });
  }

  setCompensated(on: boolean): void {
    this.store.update((s) => {
      s.compensated = on;
    });
  }

  /**
   * Relative move of one axis from the latest snapshot. Controls stay locked
   * until the service acknowledges; a limit rejection renders inline and
   * leaves both the lab and the displayed position unchanged.
   */
  async jog(axis: Axis, deltaMm: number): Promise<void> {
    const s = this.store.state;
    if (s.status !== "connected" || s.jogBusy || s.snapshot === null) return;
    const target: StagePos = { ...s.snapshot.position };
    target[axis] += deltaMm;
    await this.moveTo(target);
  }

  async moveTo(target: StagePos): Promise<void> {
    const s = this.store.state;
    if (s.status !== "connected" || s.jogBusy) return;
    this.store.update((st) => {
      st.jogBusy = true;
    });
    const t0 = now();
    try {
      const result = await this.client.moveStage(target, s.compensated);
      this.store.update((st) => {
        st.snapshot = result;
        st.lastAckMs = now() - t0;
        st.controlError = null;
      });
    } catch (e) {
      if (!(e instanceof ApiError)) throw e;
      this.store.update((st) => {
        st.controlError = e.message;
      });
    } finally {
      this.store.update((st) => {
        st.jogBusy = false;
      });
    }
  }

  async setSolenoid(tesla: number): Promise<void> {
    try {
      const snap = await this.client.setSolenoid(tesla);
      this.store.update((s) => {
        s.snapshot = snap;
        s.controlError = null;
      });
    } catch (e) {
      if (!(e instanceof ApiError)) throw e;
      this.store.update((s) => {
        s.controlError = e.message;
      });
    }
  }

  /**
   * Launch an experiment and stream its points into the store in seq order.
   * Returns when the run is registered; `finished()` resolves at done/error.
   */
  async launch(kind: ExperimentKind, params: object = {}): Promise<string> {
    this.subscriber?.stop();
    const snap = this.store.state.snapshot;
    const ref = await this.client.runExperiment(kind, params);
    const run: ActiveRun = {
      runId: ref.run_id,
      kind,
      points: [],
      fits: null,
      done: false,
      error: null,
      warning: null,
    };
    this.store.update((s) => {
      s.run = run;
    });
    const launchedAt = snap ? { position: snap.position, solenoidT: snap.solenoid_t } : null;
    this.launchContext.set(ref.run_id, launchedAt);

    let settle!: (r: ActiveRun) => void;
    this.runFinished = new Promise<ActiveRun>((resolve) => {
      settle = resolve;
    });
    const sub = new RunSubscriber(
      this.wsBase,
      ref.run_id,
      {
        onPoint: (p) =>
          this.store.update((s) => {
            s.run?.points.push(p);
          }),
        onFit: (fits) =>
          this.store.update((s) => {
            if (s.run) s.run.fits = fits;
          }),
        onDone: () => {
          this.store.update((s) => {
            if (s.run) s.run.done = true;
          });
          settle(this.store.state.run!);
          void this.refresh().catch(() => {});
        },
        onError: (type, message) => {
          this.store.update((s) => {
            if (s.run) {
              s.run.error = `${type}: ${message}`;
              s.run.done = true;
            }
          });
          settle(this.store.state.run!);
        },
        onWarning: (message) =>
          this.store.update((s) => {
            if (s.run) s.run.warning = message;
          }),
      },
      this.socketFactory,
    );
    this.subscriber = sub;
    sub.start();
    return ref.run_id;
  }

  finished(): Promise<ActiveRun> {
    if (this.runFinished === null) throw new Error("no run launched");
    return this.runFinished;
  }

  /** Pin the completed active run for side-by-side comparison. */
  pinCurrent(label?: string): void {
    const run = this.store.state.run;
    if (run === null || !run.done || run.error !== null) return;
    const ctx = this.launchContext.get(run.runId) ?? null;
    const position = ctx?.position ?? { x: 0, y: 0, z: 0 };
    const { fLHz, widthHz } = resonanceSummary(run.fits ?? {});
    const auto = `${run.runId} @ x=${position.x.toFixed(1)} z=${position.z.toFixed(1)}`;
    this.store.update((s) => {
      s.pinned.push({
        runId: run.runId,
        label: label ?? auto,
        position,
        solenoidT: ctx?.solenoidT ?? 0,
        points: [...run.points],
        fLHz,
        widthHz,
      });
    });
  }

  unpin(index: number): void {
    this.store.update((s) => {
      s.pinned.splice(index, 1);
    });
  }

  /** Run the service-side sweet-spot search and record its probe history. */
  async huntSweetSpot(range: [number, number], budget = 60, shots = 300): Promise<void> {
    this.store.update((s) => {
      s.assistant = { running: true, result: null, error: null };
    });
    try {
      const result = await this.client.findSweetSpot(range, budget, shots);
      this.store.update((s) => {
        s.assistant = { running: false, result, error: null };
      });
      await this.refresh();
    } catch (e) {
      const message = e instanceof Error ? e.message : String(e);
      this.store.update((s) => {
        s.assistant = { running: false, result: null, error: message };
      });
    }
  }

  stop(): void {
    this.subscriber?.stop();
    this.subscriber = null;
  }
}
