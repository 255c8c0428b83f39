import { ConsoleApp } from "../app.js";
import { bracketSteps, comparePins } from "../controllers/pins.js";
import { ConsoleState } from "../state.js";
import { fmtMHz } from "./format.js";
import { drawTrace, TraceSeries } from "./plot.js";

const PALETTE = ["#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2"];

/** Pinned-trace overlay, peak-shift comparison, and sweet-spot assistant. */
export class PinnedPane {
  private selected = new Set<number>();

  constructor(
    private readonly root: HTMLElement,
    private readonly app: ConsoleApp,
  ) {
    root.innerHTML = `
      <h2>pinned traces</h2>
      <ul class="pins" data-ref="pins"></ul>
      <canvas data-ref="plot" width="560" height="220"></canvas>
      <div class="fitline" data-ref="compare"></div>
      <h2>sweet-spot assistant</h2>
      <div class="row">
        <label>x from <input type="number" value="-95" data-ref="lo"></label>
        <label>to <input type="number" value="-50" data-ref="hi"></label>
        <label>budget <input type="number" value="60" min="5" data-ref="budget"></label>
        <button data-ref="hunt">hunt</button>
      </div>
      <div class="error" data-ref="aerror" hidden></div>
      <div class="fitline" data-ref="aresult"></div>
      <div class="bracket-wrap">
        <table class="bracket" data-ref="bracket" hidden>
          <thead><tr><th>#</th><th>x (mm)</th><th>f_L</th><th>bracket (mm)</th></tr></thead>
          <tbody data-ref="bracketbody"></tbody>
        </table>
      </div>
    `;
    this.ref<HTMLButtonElement>("hunt").addEventListener("click", () => {
      const lo = Number(this.ref<HTMLInputElement>("lo").value);
      const hi = Number(this.ref<HTMLInputElement>("hi").value);
      const budget = Number(this.ref<HTMLInputElement>("budget").value);
      void this.app.huntSweetSpot([lo, hi], budget);
    });
  }

  private ref<T extends HTMLElement>(name: string): T {
    return this.root.querySelector(`[data-ref="${name}"]`) as T;
  }

  /** Indices of the pins compared below the overlay: selected, else newest two. */
  compareIndices(s: ConsoleState): [number, number] | null {
    const picked = [...this.selected].filter((i) => i < s.pinned.length);
    if (picked.length >= 2) return [picked[0]!, picked[1]!];
    if (s.pinned.length >= 2) return [s.pinned.length - 2, s.pinned.length - 1];
    return null;
  }

  update(s: ConsoleState): void {
    const list = this.ref<HTMLUListElement>("pins");
    list.textContent = "";
    s.pinned.forEach((pin, i) => {
      const li = document.createElement("li");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = this.selected.has(i);
      box.addEventListener("change", () => {
        if (box.checked) this.selected.add(i);
        else this.selected.delete(i);
        this.update(this.app.store.state);
      });
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.background = PALETTE[i % PALETTE.length]!;
      const text = document.createElement("span");
      text.textContent = ` ${pin.label}: f_L ${fmtMHz(pin.fLHz)} `;
      const del = document.createElement("button");
      del.textContent = "x";
      del.addEventListener("click", () => {
        this.selected.delete(i);
        this.app.unpin(i);
      });
      li.append(box, swatch, text, del);
      list.appendChild(li);
    });

    const series: TraceSeries[] = s.pinned.map((pin, i) => ({
      points: pin.points,
      color: PALETTE[i % PALETTE.length]!,
    }));
    drawTrace(this.ref<HTMLCanvasElement>("plot"), series);

    const cmpEl = this.ref("compare");
    const idx = this.compareIndices(s);
    if (idx !== null) {
      const cmp = comparePins(s.pinned[idx[0]]!, s.pinned[idx[1]]!);
      if (cmp.shiftHz === null) {
        cmpEl.textContent = "peak shift: n/a (a compared trace has no fitted peak)";
      } else {
        const lw =
          cmp.shiftLinewidths === null ? "" : ` = ${cmp.shiftLinewidths.toFixed(1)} linewidths`;
        cmpEl.textContent = `peak shift: ${fmtMHz(cmp.shiftHz)}${lw}`;
      }
    } else {
      cmpEl.textContent = s.pinned.length === 1 ? "pin a second trace to compare" : "";
    }

    const a = s.assistant;
    this.ref<HTMLButtonElement>("hunt").disabled = a.running || s.status !== "connected";
    const aerr = this.ref("aerror");
    aerr.hidden = a.error === null;
    aerr.textContent = a.error ?? "";
    const ares = this.ref("aresult");
    if (a.running) {
      ares.textContent = "hunting ...";
    } else if (a.result) {
      const r = a.result;
      ares.textContent =
        `x* = ${r.x_star.toFixed(2)} mm, f_L min = ${fmtMHz(r.f_l_min_hz)}, ` +
        `residual angle = ${r.residual_angle_deg.toFixed(3)} deg, ${r.n_probes} probes`;
    } else {
      ares.textContent = "";
    }

    const table = this.ref<HTMLTableElement>("bracket");
    const body = this.ref<HTMLTableSectionElement>("bracketbody");
    body.textContent = "";
    if (a.result && a.result.probes.length > 0) {
      table.hidden = false;
      for (const step of bracketSteps(a.result.probes)) {
        const tr = document.createElement("tr");
        const cells = [
          String(step.step),
          step.x.toFixed(2),
          fmtMHz(step.fLHz),
          `[${step.lo.toFixed(2)}, ${step.hi.toFixed(2)}]`,
        ];
        for (const c of cells) {
          const td = document.createElement("td");
          td.textContent = c;
          tr.appendChild(td);
        }
        body.appendChild(tr);
      }
    } else {
      table.hidden = true;
    }
  }
}
