import http from "node:http";
import path from "node:path";
import { fileURLToPath } from "node:url";

import express from "express";
import { WebSocket, WebSocketServer } from "ws";

// Static host for the console page plus a same-origin proxy to the lab
// service, so the browser needs neither CORS nor a configured service URL.
//   node dist/server.js [--port 5173] [--labd http://127.0.0.1:8765]

function arg(name: string, fallback: string): string {
  const i = process.argv.indexOf(`--${name}`);
  const v = i >= 0 ? process.argv[i + 1] : undefined;
  return v !== undefined ? v : fallback;
}

const port = Number(arg("port", "5173"));
const labd = arg("labd", "http://127.0.0.1:8765").replace(/\/+$/, "");
const labdWs = labd.replace(/^http/, "ws");

const here = path.dirname(fileURLToPath(import.meta.url));
const root = path.resolve(here, "..");

const app = express();
app.use(express.raw({ type: "*/*", limit: "4mb" }));

app.post("/api", async (req, res) => {
  try {
    const upstream = await fetch(`${labd}/api`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: (req.body as Buffer).toString("utf8"),
    });
    res.status(upstream.status).type("application/json").send(await upstream.text());
  } catch (e) {
    res.status(502).json({ ok: false, error: { type: "Upstream", message: String(e) } });
  }
});

app.get("/health", async (_req, res) => {
  try {
    const upstream = await fetch(`${labd}/health`);
    res.status(upstream.status).type("application/json").send(await upstream.text());
  } catch (e) {
    res.status(502).json({ status: "unreachable", detail: String(e) });
  }
});

app.get("/", (_req, res) => res.sendFile(path.join(root, "index.html")));
app.get("/styles.css", (_req, res) => res.sendFile(path.join(root, "styles.css")));
app.use("/dist", express.static(here));

const server = http.createServer(app);
const wss = new WebSocketServer({ noServer: true });

server.on("upgrade", (req, socket, head) => {
  const url = req.url ?? "";
  if (!url.startsWith("/ws/")) {
    socket.destroy();
    return;
  }
  wss.handleUpgrade(req, socket, head, (client) => {
    const upstream = new WebSocket(`${labdWs}${url}`);
    upstream.on("message", (data, isBinary) => client.send(data, { binary: isBinary }));
    upstream.on("close", () => client.close());
    upstream.on("error", () => client.close());
    client.on("message", (data, isBinary) => {
      if (upstream.readyState === WebSocket.OPEN) upstream.send(data, { binary: isBinary });
    });
    client.on("close", () => {
      if (upstream.readyState === WebSocket.OPEN || upstream.readyState === WebSocket.CONNECTING) {
        upstream.close();
      }
    });
  });
});

server.listen(port, "127.0.0.1", () => {
  console.log(`console on http://127.0.0.1:${port} -> lab service at ${labd}`);
});
