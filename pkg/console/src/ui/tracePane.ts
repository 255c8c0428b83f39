import { ConsoleApp } from "../app.js";
import { ExperimentKind, EXPERIMENT_KINDS } from "../api/schema.js";
import { resonanceSummary } from "../controllers/pins.js";
import { ConsoleState } from "../state.js";
import { fmtFitEntry, fmtMHz, sweepLabel } from "./format.js";
import { drawTrace } from "./plot.js";

/** Live trace: launch controls, streaming point plot, service fit overlay. */
export class TracePane {
  constructor(
    private readonly root: HTMLElement,
    private readonly app: ConsoleApp,
  ) {
    root.innerHTML = `
      <h2>live trace</h2>
      <div class="row">
        <label>experiment
          <select data-ref="kind">
            ${EXPERIMENT_KINDS.map((k) => `<option value="${k}">${k}</option>`).join("")}
          </select>
        </label>
        <label>points <input type="number" value="241" min="4" max="2000" data-ref="npoints"></label>
        <label>shots <input type="number" value="200" min="1" data-ref="shots"></label>
        <button data-ref="launch">run</button>
      </div>
      <div class="statusline">
        <span data-ref="runid" class="muted"></span>
        <span data-ref="count"></span>
      </div>
      <div class="warning" data-ref="warning" hidden></div>
      <div class="error" data-ref="error" hidden></div>
      <canvas data-ref="plot" width="560" height="260"></canvas>
      <div class="muted" data-ref="xlabel"></div>
      <div data-ref="fit" class="fitline"></div>
      <button data-ref="pin" disabled>pin trace</button>
    `;

    this.ref<HTMLButtonElement>("launch").addEventListener("click", () => {
      const kind = this.ref<HTMLSelectElement>("kind").value as ExperimentKind;
      const nPoints = Number(this.ref<HTMLInputElement>("npoints").value);
      const shots = Number(this.ref<HTMLInputElement>("shots").value);
      const params: Record<string, number> =
        kind === "rb" ? { shots } : { n_points: nPoints, shots };
      void this.app.launch(kind, params);
    });
    this.ref<HTMLButtonElement>("pin").addEventListener("click", () => {
      this.app.pinCurrent();
    });
  }

  private ref<T extends HTMLElement>(name: string): T {
    return this.root.querySelector(`[data-ref="${name}"]`) as T;
  }

  update(s: ConsoleState): void {
    const run = s.run;
    this.ref<HTMLButtonElement>("launch").disabled = s.status !== "connected";
    this.ref("runid").textContent = run ? `${run.runId} (${run.kind})` : "no run";
    this.ref("count").textContent = run
      ? `${run.points.length} points${run.done ? ", done" : " ..."}`
      : "";
    const warn = this.ref("warning");
    warn.hidden = !run || run.warning === null;
    warn.textContent = run?.warning ?? "";
    const err = this.ref("error");
    err.hidden = !run || run.error === null;
    err.textContent = run?.error ?? "";
    this.ref("xlabel").textContent = run ? sweepLabel(run.kind) : "";

    const fitEl = this.ref("fit");
    if (run?.fits) {
      if (run.kind === "spectroscopy") {
        const { fLHz, widthHz } = resonanceSummary(run.fits);
        fitEl.textContent =
          fLHz === null
            ? "fit: no peak detected"
            : `fit: f_L = ${fmtMHz(fLHz)}, linewidth = ${fmtMHz(widthHz, 2)}`;
      } else {
        const parts = Object.entries(run.fits)
          .map(([k, v]) => fmtFitEntry(k, v))
          .filter((p): p is string => p !== null);
        fitEl.textContent = parts.length > 0 ? `fit: ${parts.join(", ")}` : "fit received";
      }
    } else {
      fitEl.textContent = "";
    }

    const marker =
      run?.kind === "spectroscopy" && run.fits ? resonanceSummary(run.fits).fLHz : null;
    drawTrace(this.ref<HTMLCanvasElement>("plot"), run ? [{ points: run.points, color: "#2563eb" }] : [], marker);

    this.ref<HTMLButtonElement>("pin").disabled =
      !run || !run.done || run.error !== null || run.kind !== "spectroscopy";
  }
}
