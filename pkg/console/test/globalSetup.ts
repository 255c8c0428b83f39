import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";

import { LABD_PORT, LABD_URL } from "./labdTarget.js";

// Spawns one real lab service for the whole test run; unit tests ignore it,
// the live suite drives it over actual HTTP and WebSocket.

let proc: ChildProcess | null = null;

async function waitHealthy(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError = "no response";
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${LABD_URL}/health`);
      if (res.ok) return;
      lastError = `status ${res.status}`;
    } catch (e) {
      lastError = String(e);
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`lab service did not come up on :${LABD_PORT} (${lastError})`);
}

export default async function setup(): Promise<() => void> {
  const dir = mkdtempSync(path.join(tmpdir(), "console-labd-"));
  const cfgPath = path.join(dir, "maglab.yaml");
  writeFileSync(cfgPath, `output_dir: ${path.join(dir, "runs")}\n`);

  proc = spawn("labd", ["serve", "--config", cfgPath, "--port", String(LABD_PORT)], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  let stderr = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderr = (stderr + chunk.toString()).slice(-4000);
  });
  proc.on("exit", (code) => {
    if (code !== null && code !== 0) {
      console.error(`lab service exited with ${code}\n${stderr}`);
    }
  });

  try {
    await waitHealthy(30_000);
  } catch (e) {
    proc.kill();
    throw new Error(`${String(e)}\nservice stderr:\n${stderr}`);
  }

  return () => {
    proc?.kill();
    proc = null;
  };
}
