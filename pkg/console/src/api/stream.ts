import {
  StreamMessage,
  StreamMessageSchema,
  TracePoint,
  TracePointSchema,
} from "./schema.js";

/** Structural subset of the browser WebSocket; `ws` satisfies it too. */
export interface SocketLike {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

type SeqMessage = Extract<StreamMessage, { seq: number }>;

export interface StreamHandlers {
  onPoint(point: TracePoint): void;
  onFit(fits: Record<string, unknown>): void;
  onDone(info: Record<string, unknown>): void;
  onError(type: string, message: string): void;
  /** Gap or early close detected; fired alongside the automatic re-sync. */
  onWarning(message: string): void;
}

// A buffered message this far ahead of the next expected seq means the gap
// is real, not transient reordering.
const GAP_WINDOW = 64;
const MAX_RESYNCS = 3;

/**
 * Orders one run's WebSocket stream by sequence number.
 *
 * Messages are delivered to the handlers strictly in seq order with no gaps:
 * out-of-order arrivals are buffered, duplicates from replays are dropped, and
 * a persistent gap (or a socket that dies mid-run) triggers a warning plus an
 * automatic reconnect from the first missing seq.
 */
export class RunSubscriber {
  private nextSeq = 1;
  private buffer = new Map<number, SeqMessage>();
  private socket: SocketLike | null = null;
  private doneSeen = false;
  private stopped = false;
  private resyncsLeft = MAX_RESYNCS;

  constructor(
    private readonly wsBase: string,
    public readonly runId: string,
    private readonly handlers: StreamHandlers,
    private readonly factory: SocketFactory,
  ) {}

  start(fromSeq = 1): void {
    this.nextSeq = fromSeq;
    this.open(fromSeq);
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
  }

  get done(): boolean {
    return this.doneSeen;
  }

  private open(fromSeq: number): void {
    const url = `${this.wsBase}/ws/runs/${this.runId}?from_seq=${fromSeq}`;
    const sock = this.factory(url);
    this.socket = sock;
    sock.onmessage = (ev) => this.ingest(ev.data);
    sock.onclose = () => this.onSocketClosed(sock);
    sock.onerror = () => {
      /* close follows; handled there */
    };
  }

  /** Test seam: feed one raw frame as if it arrived on the socket. */
  ingest(data: unknown): void {
    if (this.stopped || this.doneSeen) return;
    let msg: StreamMessage;
    try {
      msg = StreamMessageSchema.parse(JSON.parse(String(data)));
    } catch (e) {
      this.fail("BadMessage", `unparseable stream message: ${String(e)}`);
      return;
    }
    if (!("seq" in msg)) {
      // pre-stream rejection (unknown run id): no seq, terminal
      this.fail(msg.payload.type, msg.payload.message);
      return;
    }
    if (msg.seq < this.nextSeq) return; // replay duplicate
    this.buffer.set(msg.seq, msg);
    while (true) {
      const next = this.buffer.get(this.nextSeq);
      if (next === undefined) break;
      this.buffer.delete(this.nextSeq);
      this.nextSeq += 1;
      this.deliver(next);
      if (this.doneSeen) return;
    }
    const maxBuffered = Math.max(...this.buffer.keys(), 0);
    if (this.buffer.size > 0 && maxBuffered - this.nextSeq >= GAP_WINDOW) {
      this.resync(`sequence gap at ${this.nextSeq} (buffered up to ${maxBuffered})`);
    }
  }

  private deliver(msg: SeqMessage): void {
    switch (msg.type) {
      case "point": {
        const parsed = TracePointSchema.safeParse(msg.payload);
        if (!parsed.success) {
          this.fail("BadMessage", `malformed point at seq ${msg.seq}`);
          return;
        }
        this.handlers.onPoint(parsed.data);
        return;
      }
      case "fit":
        this.handlers.onFit(msg.payload);
        return;
      case "done":
        this.doneSeen = true;
        this.handlers.onDone(msg.payload);
        this.stopSocket();
        return;
      case "error": {
        this.doneSeen = true;
        const type = typeof msg.payload.type === "string" ? msg.payload.type : "RunError";
        const message =
          typeof msg.payload.message === "string" ? msg.payload.message : "run failed";
        this.fail(type, message);
        return;
      }
    }
  }

  private onSocketClosed(sock: SocketLike): void {
    if (sock !== this.socket) return; // superseded by a resync
    if (this.stopped || this.doneSeen) return;
    this.resync(`stream closed before done at seq ${this.nextSeq}`);
  }

  private resync(reason: string): void {
    if (this.resyncsLeft <= 0) {
      this.fail("StreamGap", `giving up after ${MAX_RESYNCS} re-syncs: ${reason}`);
      return;
    }
    this.resyncsLeft -= 1;
    this.handlers.onWarning(`${reason}; re-syncing from seq ${this.nextSeq}`);
    this.stopSocket();
    this.buffer.clear();
    this.open(this.nextSeq);
  }

  private fail(type: string, message: string): void {
    this.doneSeen = true;
    this.stopSocket();
    this.handlers.onError(type, message);
  }

  private stopSocket(): void {
    const sock = this.socket;
    this.socket = null;
    if (sock) {
      sock.onclose = null;
      sock.close();
    }
  }
}
