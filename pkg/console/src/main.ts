import { LabClient } from "./api/client.js";
import { ConsoleApp } from "./app.js";
import { Store } from "./state.js";
import { ControlPane } from "./ui/controlPane.js";
import { PinnedPane } from "./ui/pinnedPane.js";
import { TracePane } from "./ui/tracePane.js";

// By default the page talks to its own origin and the static host proxies
// /api and /ws through to the lab service; ?labd=http://host:port goes direct
// (requires the service to be reachable from the browser).

function main(): void {
  const qs = new URLSearchParams(location.search);
  const direct = qs.get("labd");
  const baseUrl = direct ?? "";
  const wsBase = direct
    ? direct.replace(/^http/, "ws")
    : `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}`;

  const store = new Store();
  const client = new LabClient(baseUrl);
  const app = new ConsoleApp(client, wsBase, store);

  const control = new ControlPane(document.getElementById("control")!, app);
  const trace = new TracePane(document.getElementById("trace")!, app);
  const pinned = new PinnedPane(document.getElementById("pinned")!, app);

  store.subscribe((s) => {
    control.update(s);
    trace.update(s);
    pinned.update(s);
  });
  store.update(() => {});

  void app.connect().catch(() => {
    // connection banner already shows the failure; leave retry to the user
  });
}

window.addEventListener("load", main);
