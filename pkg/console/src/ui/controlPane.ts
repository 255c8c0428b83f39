import { Axis, ConsoleApp } from "../app.js";
import { ConsoleState } from "../state.js";
import { fmtMm, fmtMs, fmtTesla } from "./format.js";

const AXES: Axis[] = ["x", "y", "z"];
const STEPS = [0.1, 0.5, 1, 5, 10];

/** Stage and field controls: jog buttons, solenoid setpoint, status readout. */
export class ControlPane {
  private jogButtons: HTMLButtonElement[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly app: ConsoleApp,
  ) {
    root.innerHTML = `
      <h2>stage &amp; field</h2>
      <div class="statusline">
        <span class="dot" data-ref="dot"></span>
        <span data-ref="status">disconnected</span>
        <span class="muted" data-ref="qubit"></span>
      </div>
      <table class="jog">
        <tbody data-ref="jogbody"></tbody>
      </table>
      <div class="row">
        <label>step
          <select data-ref="step">
            ${STEPS.map((s) => `<option value="${s}"${s === 1 ? " selected" : ""}>${s} mm</option>`).join("")}
          </select>
        </label>
        <label><input type="checkbox" data-ref="comp"> backlash compensation</label>
      </div>
      <div class="row">
        <label>solenoid (T) <input type="number" step="0.005" value="0" data-ref="soltesla"></label>
        <button data-ref="solset">set</button>
        <span class="muted" data-ref="solnow"></span>
      </div>
      <div class="row muted">
        <span data-ref="ack"></span>
        <span data-ref="queue"></span>
        <span data-ref="events"></span>
      </div>
      <div class="error" data-ref="error" hidden></div>
      <button data-ref="refresh">refresh state</button>
    `;

    const body = this.ref<HTMLTableSectionElement>("jogbody");
    for (const axis of AXES) {
      const tr = document.createElement("tr");
      const minus = this.jogButton(axis, -1);
      const plus = this.jogButton(axis, +1);
      const label = document.createElement("td");
      label.textContent = axis;
      const value = document.createElement("td");
      value.dataset["ref"] = `pos-${axis}`;
      value.className = "posval";
      const tdMinus = document.createElement("td");
      tdMinus.appendChild(minus);
      const tdPlus = document.createElement("td");
      tdPlus.appendChild(plus);
      tr.append(label, tdMinus, value, tdPlus);
      body.appendChild(tr);
    }

    this.ref<HTMLSelectElement>("step").addEventListener("change", (e) => {
      this.app.setJogStep(Number((e.target as HTMLSelectElement).value));
    });
    this.ref<HTMLInputElement>("comp").addEventListener("change", (e) => {
      this.app.setCompensated((e.target as HTMLInputElement).checked);
    });
    this.ref<HTMLButtonElement>("solset").addEventListener("click", () => {
      const t = Number(this.ref<HTMLInputElement>("soltesla").value);
      void this.app.setSolenoid(t);
    });
    this.ref<HTMLButtonElement>("refresh").addEventListener("click", () => {
      void this.app.refresh();
    });
  }

  private jogButton(axis: Axis, dir: 1 | -1): HTMLButtonElement {
    const b = document.createElement("button");
    b.textContent = dir > 0 ? `${axis}+` : `${axis}−`;
    b.addEventListener("click", () => {
      void this.app.jog(axis, dir * this.app.store.state.jogStepMm);
    });
    this.jogButtons.push(b);
    return b;
  }

  private ref<T extends HTMLElement>(name: string): T {
    return this.root.querySelector(`[data-ref="${name}"]`) as T;
  }

  update(s: ConsoleState): void {
    this.ref("status").textContent = s.status;
    this.ref("dot").className = `dot ${s.status}`;
    this.ref("qubit").textContent = s.snapshot ? s.snapshot.qubit : "";
    for (const axis of AXES) {
      const el = this.ref(`pos-${axis}`);
      el.textContent = s.snapshot ? fmtMm(s.snapshot.position[axis]) : "--";
    }
    const locked = s.status !== "connected" || s.jogBusy;
    for (const b of this.jogButtons) b.disabled = locked;
    this.ref<HTMLButtonElement>("solset").disabled = s.status !== "connected";
    this.ref("solnow").textContent = s.snapshot ? `now ${fmtTesla(s.snapshot.solenoid_t)}` : "";
    this.ref("ack").textContent = `last ack ${fmtMs(s.lastAckMs)}`;
    this.ref("queue").textContent = s.snapshot ? `queue ${s.snapshot.queue_depth}` : "";
    this.ref("events").textContent = s.snapshot ? `stage events ${s.snapshot.event_count}` : "";
    const err = this.ref("error");
    err.hidden = s.controlError === null;
    err.textContent = s.controlError ?? "";
  }
}
