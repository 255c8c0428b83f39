// Integration against a real lab service spawned by the global setup; these
// tests cover the console release criteria end to end over HTTP + WebSocket.
import { beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { LabClient } from "../src/api/client.js";
import { SocketFactory, SocketLike } from "../src/api/stream.js";
import { ConsoleApp } from "../src/app.js";
import { comparePins } from "../src/controllers/pins.js";
import { Store } from "../src/state.js";
import { LABD_URL, LABD_WS } from "./labdTarget.js";

let socketsOpened = 0;
const wsFactory: SocketFactory = (url) => {
  socketsOpened += 1;
  return new WebSocket(url) as unknown as SocketLike;
};

const store = new Store();
const client = new LabClient(LABD_URL);
const app = new ConsoleApp(client, LABD_WS, store, wsFactory);

beforeAll(async () => {
  await app.connect();
});

describe("jog against the live service", () => {
  it("acknowledges each jog in under 200 ms with the updated position", async () => {
    expect(store.state.status).toBe("connected");
    const x0 = store.state.snapshot!.position.x;
    const acks: number[] = [];
    for (let i = 1; i <= 3; i++) {
      await app.jog("x", 1);
      expect(store.state.controlError).toBeNull();
      expect(store.state.snapshot!.position.x).toBeCloseTo(x0 + i, 6);
      acks.push(store.state.lastAckMs!);
    }
    for (const ms of acks) expect(ms).toBeLessThan(200);
  });

  it("renders a limit rejection inline and leaves the position unchanged", async () => {
    const before = { ...store.state.snapshot!.position };
    const eventsBefore = store.state.snapshot!.event_count;
    await app.jog("z", -1000);
    expect(store.state.controlError).toMatch(/limit|outside/i);
    expect(store.state.snapshot!.position).toEqual(before);
    await app.refresh();
    expect(store.state.snapshot!.position).toEqual(before);
    expect(store.state.snapshot!.event_count).toBe(eventsBefore);
  });
});

describe("streamed spectroscopy", () => {
  it("renders all 500 points in sequence order with zero gaps", async () => {
    const socketsBefore = socketsOpened;
    const runId = await app.launch("spectroscopy", { n_points: 500, shots: 50 });
    const run = await app.finished();

    expect(run.runId).toBe(runId);
    expect(run.error).toBeNull();
    expect(run.warning).toBeNull(); // no gap, no re-sync
    expect(socketsOpened - socketsBefore).toBe(1); // one socket carried the whole run
    expect(run.done).toBe(true);
    expect(run.points.length).toBe(500);
    run.points.forEach((p, i) => expect(p.index).toBe(i));
    for (let i = 1; i < run.points.length; i++) {
      expect(run.points[i]!.sweep_value).toBeGreaterThan(run.points[i - 1]!.sweep_value);
    }
    expect(run.fits).not.toBeNull();

    // service-side log agrees: 500 points + fit + done, seq 1..502 gapless
    const snap = await client.getRun(runId);
    expect(snap.done).toBe(true);
    expect(snap.n_messages).toBe(502);
    const seqs = snap.messages.map((m) => (m as { seq: number }).seq);
    seqs.forEach((s, i) => expect(s).toBe(i + 1));
  });

  it("replays a tail from an arbitrary seq over a second socket", async () => {
    const runId = store.state.run!.runId;
    const messages: { seq: number; type: string }[] = [];
    await new Promise<void>((resolve, reject) => {
      const ws = new WebSocket(`${LABD_WS}/ws/runs/${runId}?from_seq=501`);
      ws.on("message", (data) => {
        messages.push(JSON.parse(String(data)) as { seq: number; type: string });
      });
      ws.on("close", resolve);
      ws.on("error", reject);
    });
    expect(messages.map((m) => m.seq)).toEqual([501, 502]);
    expect(messages.at(-1)!.type).toBe("done");
  });
});

describe("pinned-trace comparison", () => {
  it("shows the peak shift between two positions more than 5 linewidths apart", async () => {
    await app.setSolenoid(0.025);
    expect(store.state.snapshot!.solenoid_t).toBeCloseTo(0.025);

    await app.moveTo({ x: -72.5, y: 0, z: -200 });
    await app.launch("spectroscopy", { n_points: 241, shots: 150 });
    await app.finished();
    app.pinCurrent("sweet spot x=-72.5");

    await app.moveTo({ x: 0, y: 0, z: -200 });
    await app.launch("spectroscopy", { n_points: 241, shots: 150 });
    await app.finished();
    app.pinCurrent("origin x=0");

    const [a, b] = store.state.pinned.slice(-2);
    expect(a!.fLHz).not.toBeNull();
    expect(b!.fLHz).not.toBeNull();
    // service fits put the two peaks where the lab landscape says they belong
    expect(a!.fLHz! / 1e6).toBeGreaterThan(40);
    expect(a!.fLHz! / 1e6).toBeLessThan(60);
    expect(b!.fLHz! / 1e6).toBeGreaterThan(110);
    expect(b!.fLHz! / 1e6).toBeLessThan(160);

    const cmp = comparePins(a!, b!);
    expect(cmp.shiftHz).not.toBeNull();
    expect(cmp.widthHz).not.toBeNull();
    expect(cmp.shiftLinewidths!).toBeGreaterThan(5);
  });
});

describe("sweet-spot assistant", () => {
  it("replays the probe history and parks the stage at x*", async () => {
    await app.huntSweetSpot([-95, -50], 24, 100);
    const a = store.state.assistant;
    expect(a.error).toBeNull();
    expect(a.result).not.toBeNull();
    const r = a.result!;
    expect(r.x_star).toBeGreaterThan(-95);
    expect(r.x_star).toBeLessThan(-50);
    expect(r.n_probes).toBeLessThanOrEqual(24);
    expect(r.probes.length).toBe(r.n_probes);
    expect(Math.abs(r.residual_angle_deg)).toBeLessThan(0.5);
    // the service parks the stage at the found optimum (compensated move, so
    // the commanded readout may carry the backlash correction of 0.05 mm)
    expect(Math.abs(store.state.snapshot!.position.x - r.x_star)).toBeLessThanOrEqual(0.1);
  });
});
