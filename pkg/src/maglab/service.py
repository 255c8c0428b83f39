"""Local HTTP + WebSocket service exposing one lab world.

One process owns one mutable world. Every mutation (stage move, solenoid
setpoint, experiment, sweet-spot search) funnels through a single FIFO
executor thread, so concurrent clients are serialized in arrival order;
reads take a consistent snapshot without queueing. Experiment progress is
streamed over per-run WebSockets with gapless sequence numbers, and every
state change is appended to the run log before its response goes out.

The service binds to loopback by default and has no authentication: it is
a desk tool for one operator.
"""

from __future__ import annotations

import asyncio
import datetime as _dt
import itertools
import queue
import threading
from contextlib import asynccontextmanager
from concurrent.futures import Future
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from maglab.benchmarking import native_fidelity_to_p_dep, rb_generate, rb_simulate, rb_fit
from maglab.config import LabConfig, build_world, load_config
from maglab.defaults import NATIVE_GATE_FIDELITY
from maglab.errors import MaglabError
from maglab.fitting import fit_decay, fit_oscillation, fit_resonance, peak_centers
from maglab.magnetics import StagePosition
from maglab.measure import BAND_HI, BAND_LO, _pi_pulse_amplitude
from maglab.runlog import RunLog, RunLogError, record_to_dict, write_payload
from maglab.scenarios import run_scenario as run_scenario_bundle
from maglab.virtlab import (
    RunRecord,
    SpectroscopySweep,
    observe,
    run_hahn_echo,
    run_rabi,
    run_ramsey,
    run_spectroscopy,
)
from maglab.world import World

EXPERIMENT_KINDS = ("spectroscopy", "rabi", "ramsey", "hahn", "rb")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ApiRequest(_Strict):
    id: str | int
    verb: str
    payload: dict = Field(default_factory=dict)


class MovePayload(_Strict):
    x: float
    y: float
    z: float
    compensated: bool = False


class SolenoidPayload(_Strict):
    tesla: float


class ExperimentPayload(_Strict):
    kind: str
    params: dict = Field(default_factory=dict)


class ScenarioPayload(_Strict):
    name: str
    seed: int | None = None


class SweetSpotPayload(_Strict):
    range: tuple[float, float]
    budget: int = 60
    shots: int = 300


class RunIdPayload(_Strict):
    run_id: str


class SpectroscopyParams(_Strict):
    center_hz: float | None = None
    span_hz: float = Field(30e6, gt=0)
    n_points: int = Field(101, ge=3, le=2000)
    shots: int = Field(200, ge=1)
    pulse_duration_s: float = Field(0.5e-6, gt=0)
    drive_amplitude: float | None = None


class RabiParams(_Strict):
    t_max_s: float = Field(5e-6, gt=0)
    n_points: int = Field(61, ge=4, le=2000)
    amplitude: float = Field(1.0, gt=0)
    shots: int = Field(500, ge=1)


class RamseyParams(_Strict):
    t_max_s: float = Field(40e-6, gt=0)
    n_points: int = Field(60, ge=4, le=2000)
    detuning_hz: float = 0.15e6
    shots: int = Field(200, ge=1)


class HahnParams(_Strict):
    t_max_s: float = Field(300e-6, gt=0)
    n_points: int = Field(50, ge=4, le=2000)
    shots: int = Field(300, ge=1)


class RBParams(_Strict):
    lengths: tuple[int, ...] = tuple(range(1, 129, 3))
    n_random: int = Field(20, ge=2, le=200)
    shots: int = Field(1000, ge=1)
    fixed_baseline: bool = True
    native_fidelity: float = Field(NATIVE_GATE_FIDELITY, gt=0.5, le=1.0)


_PARAM_MODELS = {
    "spectroscopy": SpectroscopyParams,
    "rabi": RabiParams,
    "ramsey": RamseyParams,
    "hahn": HahnParams,
    "rb": RBParams,
}


class ApiError(Exception):
    """Domain-level failure reported inside a 200 response envelope."""

    def __init__(self, type_: str, message: str, status: int = 200) -> None:
        super().__init__(message)
        self.type = type_
        self.message = message
        self.status = status


class RunStream:
    """Ordered, buffered message stream for one run; replayable from any seq."""

    def __init__(self, run_id: str, kind: str) -> None:
        self.run_id = run_id
        self.kind = kind
        self._messages: list[dict] = []
        self._done = False
        self._lock = threading.Lock()

    def push(self, type_: str, payload: dict) -> int:
        with self._lock:
            seq = len(self._messages) + 1
            self._messages.append(
                {"run_id": self.run_id, "seq": seq, "type": type_,
                 "payload": _json_safe(payload)}
            )
            if type_ in ("done", "error"):
                self._done = True
            return seq

    @property
    def done(self) -> bool:
        with self._lock:
            return self._done

    def snapshot(self, from_seq: int = 1) -> list[dict]:
        with self._lock:
            if from_seq <= 1:
                return list(self._messages)
            return [m for m in self._messages if m["seq"] >= from_seq]

    def after(self, seq: int) -> list[dict]:
        with self._lock:
            return self._messages[seq:]


def _json_safe(obj):
    """Strict-JSON form: numpy scalars unwrapped, non-finite floats -> None.

    WebSocket consumers parse with strict JSON (no NaN tokens), so failed
    fits must report null rather than NaN.
    """
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _fit_summary(fit) -> dict:
    return {
        "model": fit.model,
        "converged": bool(fit.converged),
        "params": {k: float(v) for k, v in fit.params.items()},
        "errors": {k: float(v) for k, v in fit.errors.items()},
        "residual_rms": float(fit.residual_rms),
    }


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


class LabService:
    """The one owner of the lab world; serializes every mutation FIFO."""

    def __init__(self, config: LabConfig) -> None:
        self.config = config
        self.world: World = build_world(config)
        out = Path(config.output_dir)
        self.log = RunLog(out / "runlog.jsonl", fsync=config.fsync)
        self.output_dir = out
        self._world_lock = threading.Lock()
        self._runs: dict[str, RunStream] = {}
        self._runs_lock = threading.Lock()
        self._run_counter = itertools.count(1)
        self._queue_counter = itertools.count(1)
        self._submit_lock = threading.Lock()
        self._jobs: queue.Queue = queue.Queue()
        self._worker = threading.Thread(target=self._drain, daemon=True,
                                        name="labd-executor")
        self._worker.start()

    # -- FIFO executor -------------------------------------------------------

    def _drain(self) -> None:
        while True:
            item = self._jobs.get()
            if item is None:
                return
            fn, fut = item
            if not fut.set_running_or_notify_cancel():
                continue
            try:
                fut.set_result(fn())
            except BaseException as e:
                fut.set_exception(e)

    def submit(self, fn) -> Future:
        fut: Future = Future()
        self._jobs.put((fn, fut))
        return fut

    def submit_indexed(self, make_job) -> Future:
        """Enqueue make_job(queue_index); the stamp matches the queue slot.

        The counter draw and the put happen under one lock so a response's
        queue_index always reflects true FIFO order.
        """
        with self._submit_lock:
            idx = next(self._queue_counter)
            return self.submit(make_job(idx))

    def close(self) -> None:
        self._jobs.put(None)
        self._worker.join(timeout=5)
        self.log.close()

    # -- helpers ---------------------------------------------------------------

    def _state_snapshot(self) -> dict:
        w = self.world
        cmd = w.stage.commanded
        return {
            "position": {"x": cmd.x, "y": cmd.y, "z": cmd.z},
            "solenoid_t": w.solenoid.setpoint_t,
            "qubit": w.qubit.name,
            "event_count": w.stage.event_count,
            "limits": {
                "x": list(w.stage.limits.x),
                "y": list(w.stage.limits.y),
                "z": list(w.stage.limits.z),
            },
            "queue_depth": self._jobs.qsize(),
            "log_seq": self.log.next_seq - 1,
            "active_runs": self.active_runs(),
        }

    def active_runs(self) -> list[str]:
        with self._runs_lock:
            return [rid for rid, s in self._runs.items() if not s.done]

    def get_stream(self, run_id: str) -> RunStream | None:
        with self._runs_lock:
            return self._runs.get(run_id)

    def _new_run(self, kind: str) -> RunStream:
        run_id = f"{kind}-{next(self._run_counter):04d}"
        stream = RunStream(run_id, kind)
        with self._runs_lock:
            self._runs[run_id] = stream
        return stream

    def _require_writable(self) -> None:
        if self.log.read_only:
            raise ApiError("ReadOnly",
                           f"service is read-only (run log failed: {self.log.error})")

    # -- verb handlers -----------------------------------------------------------

    def handle(self, req: ApiRequest) -> tuple[int, dict]:
        """Dispatch one API message; returns (http_status, response body)."""
        try:
            handler = getattr(self, f"_verb_{req.verb}", None)
            if handler is None:
                raise ApiError("UnknownVerb",
                               f"unknown verb {req.verb!r}; known: get_state, "
                               "move_stage, set_solenoid, run_experiment, "
                               "run_scenario, find_sweet_spot, get_run",
                               status=400)
            payload = handler(req.payload)
            body = {"id": req.id, "verb": req.verb, "ok": True,
                    "payload": _json_safe(payload),
                    "read_only": self.log.read_only}
            return 200, body
        except ValidationError as e:
            return 400, {"id": req.id, "verb": req.verb, "ok": False,
                         "error": {"type": "SchemaViolation", "message": str(e)},
                         "read_only": self.log.read_only}
        except ApiError as e:
            return e.status, {"id": req.id, "verb": req.verb, "ok": False,
                              "error": {"type": e.type, "message": e.message},
                              "read_only": self.log.read_only}
        except (MaglabError, RunLogError, ValueError) as e:
            return 200, {"id": req.id, "verb": req.verb, "ok": False,
                         "error": {"type": type(e).__name__, "message": str(e)},
                         "read_only": self.log.read_only}

    def _verb_get_state(self, payload: dict) -> dict:
        _Strict.model_validate(payload)
        with self._world_lock:
            return self._state_snapshot()

    def _verb_move_stage(self, payload: dict) -> dict:
        p = MovePayload.model_validate(payload)
        self._require_writable()

        def make_job(queue_index: int):
            def job():
                with self._world_lock:
                    self.world.move_to(StagePosition(p.x, p.y, p.z),
                                       compensated=p.compensated)
                    self.log.append("move_stage", [p.x, p.y, p.z])
                    snap = self._state_snapshot()
                snap["queue_index"] = queue_index
                return snap

            return job

        return self.submit_indexed(make_job).result()

    def _verb_set_solenoid(self, payload: dict) -> dict:
        p = SolenoidPayload.model_validate(payload)
        self._require_writable()

        def job():
            with self._world_lock:
                self.world.set_solenoid(p.tesla)
                self.log.append("set_solenoid")
                return self._state_snapshot()

        return self.submit(job).result()

    def _verb_run_experiment(self, payload: dict) -> dict:
        p = ExperimentPayload.model_validate(payload)
        if p.kind not in EXPERIMENT_KINDS:
            raise ApiError("UnknownExperiment",
                           f"unknown kind {p.kind!r}; known: {EXPERIMENT_KINDS}")
        params = _PARAM_MODELS[p.kind].model_validate(p.params)
        self._require_writable()
        stream = self._new_run(p.kind)
        self.log.append(f"run_start:{p.kind}", seed=None, payload_path=None)

        def job():
            try:
                with self._world_lock:
                    record, fits = self._execute(p.kind, params)
                self._publish(stream, record, fits)
            except (MaglabError, ValueError) as e:
                stream.push("error", {"type": type(e).__name__, "message": str(e)})
                try:
                    self.log.append(f"run_failed:{stream.run_id}")
                except RunLogError:
                    pass

        self.submit(job)
        return {"run_id": stream.run_id, "stream": f"/ws/runs/{stream.run_id}"}

    def _execute(self, kind: str, params) -> tuple[RunRecord, dict]:
        w = self.world
        if kind == "spectroscopy":
            return self._exec_spectroscopy(w, params)
        if kind == "rabi":
            t = tuple(np.linspace(0.0, params.t_max_s, params.n_points))
            rec = run_rabi(w, t, params.amplitude, params.shots)
            fit = fit_oscillation(rec)
            fits = {"rabi": _fit_summary(fit)}
            if fit.converged:
                fits["f_rabi_hz"] = float(fit.params["frequency"])
            return rec, fits
        if kind == "ramsey":
            t = tuple(np.linspace(0.0, params.t_max_s, params.n_points))
            rec = run_ramsey(w, t, params.detuning_hz, params.shots)
            fit = fit_decay(rec, model="ramsey")
            fits = {"ramsey": _fit_summary(fit)}
            if fit.converged:
                fits["t2_star_s"] = float(fit.params["t2"])
            return rec, fits
        if kind == "hahn":
            t = tuple(np.linspace(1e-7, params.t_max_s, params.n_points))
            rec = run_hahn_echo(w, t, params.shots)
            fit = fit_decay(rec, model="hahn")
            fits = {"hahn": _fit_summary(fit)}
            if fit.converged:
                fits["t2_hahn_s"] = float(fit.params["t2"])
            return rec, fits
        return self._exec_rb(w, params)

    @staticmethod
    def _exec_spectroscopy(w: World, params: SpectroscopyParams):
        if params.center_hz is None:
            lo, hi, n = BAND_LO, BAND_HI, max(params.n_points, 241)
            amp_ref = (lo * hi) ** 0.5
        else:
            lo = max(params.center_hz - params.span_hz / 2, BAND_LO)
            hi = min(params.center_hz + params.span_hz / 2, BAND_HI)
            n = params.n_points
            amp_ref = params.center_hz
        amp = params.drive_amplitude
        if amp is None:
            amp = _pi_pulse_amplitude(amp_ref, params.pulse_duration_s, w.qubit.eta0)
        sweep = SpectroscopySweep(
            f_grid=tuple(np.linspace(lo, hi, n)),
            pulse_duration=params.pulse_duration_s,
            drive_amplitude=amp,
            shots_per_point=params.shots,
        )
        rec = run_spectroscopy(w, sweep)
        fit = fit_resonance(rec, max_peaks=2)
        fits = {"resonance": _fit_summary(fit)}
        centers = peak_centers(fit)
        fits["peaks"] = [[float(c), float(a)] for c, a in centers]
        if centers:
            fits["f_l_hz"] = float(centers[0][0])
        return rec, fits

    def _exec_rb(self, w: World, params: RBParams):
        obs = observe(w)
        p_dep = native_fidelity_to_p_dep(params.native_fidelity)
        seed_tag, rng = w.next_rng()
        counts_by_len = []
        for n in params.lengths:
            total = 0
            for _ in range(params.n_random):
                seq = rb_generate(rng, n)
                total += rb_simulate(seq, p_dep, params.shots,
                                     visibility=obs.visibility,
                                     baseline=obs.baseline, rng=rng)
            counts_by_len.append(total)
        shots_total = params.n_random * params.shots
        rec = RunRecord(
            kind="rb",
            sweep_values=tuple(float(n) for n in params.lengths),
            counts=tuple(counts_by_len),
            shots=shots_total,
            position=w.stage.commanded,
            rng_seed=seed_tag,
            timestamp=_utc_now(),
            meta={"n_random": params.n_random, "p_dep": p_dep,
                  "true_position": w.stage.true_pos},
        )
        survivals = [c / shots_total for c in counts_by_len]
        baseline = obs.baseline + obs.visibility / 2.0 if params.fixed_baseline else None
        fit = rb_fit(list(params.lengths), survivals, baseline=baseline)
        fits = {"rb": _fit_summary(fit)}
        if fit.converged:
            fits["f_clifford"] = float(fit.params["f_clifford"])
            fits["f_native"] = float(fit.params["f_native"])
        return rec, fits

    def _publish(self, stream: RunStream, record: RunRecord, fits: dict) -> None:
        """Stream every point in order, persist the payload, then log it."""
        for i, (v, c) in enumerate(zip(record.sweep_values, record.counts)):
            stream.push("point", {
                "index": i,
                "sweep_value": float(v),
                "counts": int(c),
                "shots": record.shots,
                "p_blockade": c / record.shots,
            })
        payload = _json_safe(record_to_dict(record, fits=fits))
        payload["run_id"] = stream.run_id
        path = write_payload(self.output_dir, stream.run_id, payload)
        try:
            self.log.append(f"experiment:{record.kind}", record.position,
                            seed=record.rng_seed, payload_path=path)
        except RunLogError:
            pass
        stream.push("fit", fits)
        stream.push("done", {"n_points": len(record.sweep_values),
                             "payload_path": path})

    def _verb_run_scenario(self, payload: dict) -> dict:
        p = ScenarioPayload.model_validate(payload)
        self._require_writable()
        seed = p.seed if p.seed is not None else self.config.master_seed
        try:
            res = run_scenario_bundle(p.name, master_seed=seed,
                                      out_root=str(self.output_dir))
        except KeyError as e:
            raise ApiError("UnknownScenario", str(e.args[0]))
        rows = max(self._bundle_rows(res.out_dir), 1)
        seed_tag = f"{seed}:scenario:{p.name}"
        self.log.append_batch(
            [(f"scenario:{p.name}", None, seed_tag, res.out_dir)] * rows
        )
        return {
            "name": res.name,
            "passed": res.passed,
            "partial": res.partial,
            "out_dir": res.out_dir,
            "runtime_s": res.runtime_s,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in res.checks],
            "files": res.files,
        }

    @staticmethod
    def _bundle_rows(out_dir: str) -> int:
        map_path = Path(out_dir) / "map.csv"
        if not map_path.exists():
            return 0
        return max(len(map_path.read_text(encoding="utf-8").strip().split("\n")) - 1, 0)

    def _verb_find_sweet_spot(self, payload: dict) -> dict:
        from maglab.sweetspot import find_sweet_spot

        p = SweetSpotPayload.model_validate(payload)
        self._require_writable()

        def job():
            with self._world_lock:
                res = find_sweet_spot(self.world, search_range=tuple(p.range),
                                      budget=p.budget, shots=p.shots)
                pos = self.world.stage.commanded
                self.log.append("find_sweet_spot", [res.x_star, pos.y, pos.z])
                return {
                    "x_star": res.x_star,
                    "f_l_min_hz": res.f_l_min,
                    "residual_angle_deg": res.residual_angle_deg,
                    "iterations": res.iterations,
                    "n_probes": len(res.probes),
                    "probes": [[x, f] for x, f in res.probes],
                }

        return self.submit(job).result()

    def _verb_get_run(self, payload: dict) -> dict:
        p = RunIdPayload.model_validate(payload)
        stream = self.get_stream(p.run_id)
        if stream is None:
            raise ApiError("NotFound", f"unknown run id {p.run_id!r}", status=404)
        msgs = stream.snapshot()
        return {
            "run_id": p.run_id,
            "kind": stream.kind,
            "done": stream.done,
            "n_messages": len(msgs),
            "messages": msgs,
        }


def create_app(config: LabConfig | None = None) -> FastAPI:
    """Build the FastAPI app around one LabService instance."""
    cfg = config if config is not None else load_config()
    service = LabService(cfg)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        service.close()

    app = FastAPI(title="labd", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.service = service

    @app.get("/health")
    async def health():
        return {"status": "ok", "read_only": service.log.read_only}

    @app.post("/api")
    async def api(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"ok": False, "error": {
                "type": "SchemaViolation", "message": "body must be JSON"}},
                status_code=400)
        try:
            msg = ApiRequest.model_validate(body)
        except ValidationError as e:
            return JSONResponse({"ok": False, "error": {
                "type": "SchemaViolation", "message": str(e)}}, status_code=400)
        status, resp = await run_in_threadpool(service.handle, msg)
        return JSONResponse(resp, status_code=status)

    @app.websocket("/ws/runs/{run_id}")
    async def ws_run(ws: WebSocket, run_id: str, from_seq: int = 1):
        await ws.accept()
        stream = service.get_stream(run_id)
        if stream is None:
            await ws.send_json({"type": "error", "payload": {
                "type": "NotFound", "message": f"unknown run id {run_id!r}"}})
            await ws.close()
            return
        sent = max(from_seq - 1, 0)
        try:
            while True:
                pending = stream.after(sent)
                for m in pending:
                    await ws.send_json(m)
                    sent = m["seq"]
                if stream.done and not stream.after(sent):
                    break
                if not pending:
                    await asyncio.sleep(0.01)
            await ws.close()
        except WebSocketDisconnect:
            pass

    return app
