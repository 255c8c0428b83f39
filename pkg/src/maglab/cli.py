"""Command-line entry points: `labd` (service) and `qcal` (calibration runs).

qcal commands build their own world from the config and run in-process, so
the whole acceptance workflow works with no service attached. Runs that
produce a trace are persisted under the config's output directory and can
be exported or plotted later by run id.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from maglab.benchmarking import native_fidelity_to_p_dep, rb_fit, rb_generate, rb_simulate
from maglab.config import build_world, load_config
from maglab.defaults import NATIVE_GATE_FIDELITY
from maglab.errors import MaglabError
from maglab.magnetics import StagePosition
from maglab.runlog import (
    RunLog,
    export_trace_csv,
    load_payload,
    record_to_dict,
    write_payload,
)
from maglab.scenarios import SCENARIOS, list_scenarios, run_scenario
from maglab.virtlab import RunRecord, observe


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise click.BadParameter(f"expected x,y,z - got {text!r}")
    return tuple(parts)


def _utc_now() -> str:
    import datetime as _dt

    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@click.group()
def labd() -> None:
    """Local lab service."""


@labd.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Config file (default: MAGLAB_CONFIG or ./maglab.yaml).")
@click.option("--port", type=int, default=None, help="Listen port.")
@click.option("--host", type=str, default=None, help="Bind address (default loopback).")
def serve(config_path, port, host) -> None:
    """Serve the HTTP + WebSocket API around one lab world."""
    import uvicorn

    from maglab.service import create_app

    cfg = load_config(config_path)
    app = create_app(cfg)
    uvicorn.run(app, host=host or cfg.host, port=port or cfg.port, log_level="info")


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Config file (default: MAGLAB_CONFIG or ./maglab.yaml).")
@click.pass_context
def qcal(ctx, config_path) -> None:
    """Calibration and scenario runs against an in-process lab world."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


def _cfg(ctx):
    return load_config(ctx.obj.get("config_path"))


@qcal.command()
@click.argument("name", required=False)
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--out-root", type=click.Path(), default=None,
              help="Bundle root (default: config output_dir).")
@click.option("--list", "list_only", is_flag=True, help="List known scenarios.")
@click.pass_context
def scenario(ctx, name, seed, out_root, list_only) -> None:
    """Replay one named scenario and print its verdict."""
    if list_only or name is None:
        for n, description in list_scenarios():
            click.echo(f"{n:24s} {description}")
        if name is None and not list_only:
            raise SystemExit(2)
        return
    cfg = _cfg(ctx)
    try:
        res = run_scenario(
            name,
            master_seed=seed if seed is not None else cfg.master_seed,
            out_root=out_root or cfg.output_dir,
        )
    except KeyError as e:
        raise click.ClickException(str(e.args[0]))
    for c in res.checks:
        click.echo(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    overall = "PASS" if res.passed else ("PARTIAL" if res.partial else "FAIL")
    click.echo(f"{overall} {res.name} ({res.runtime_s:.1f}s) -> {res.out_dir}")
    if not res.passed:
        raise SystemExit(1)


@qcal.command("sweet-spot")
@click.option("--range", "range_", required=True,
              help="Search range A,B along x in mm (e.g. -95,-50).")
@click.option("--budget", type=int, default=60, show_default=True)
@click.option("--shots", type=int, default=300, show_default=True)
@click.option("--solenoid", type=float, default=0.025, show_default=True,
              help="Internal field setpoint, tesla.")
@click.option("--position", default="-72.5,0,-200", show_default=True,
              help="Starting stage position x,y,z in mm.")
@click.option("--qubit", default=None, help="Qubit name from the config.")
@click.pass_context
def sweet_spot(ctx, range_, budget, shots, solenoid, position, qubit) -> None:
    """Locate the Larmor-frequency minimum along x."""
    from maglab.sweetspot import find_sweet_spot

    parts = [float(v) for v in range_.split(",")]
    if len(parts) != 2:
        raise click.BadParameter(f"--range expects A,B - got {range_!r}")
    cfg = _cfg(ctx)
    world = build_world(cfg, qubit)
    world.set_solenoid(solenoid)
    world.move_to(StagePosition(*_parse_triple(position)), compensated=True)
    try:
        res = find_sweet_spot(world, search_range=(parts[0], parts[1]),
                              budget=budget, shots=shots)
    except MaglabError as e:
        raise click.ClickException(str(e))
    click.echo(f"x* = {res.x_star:.2f} mm")
    click.echo(f"f_L(min) = {res.f_l_min / 1e6:.3f} MHz")
    click.echo(f"residual out-of-plane angle = {res.residual_angle_deg:.3f} deg")
    click.echo(f"probes used = {len(res.probes)} (budget {budget})")
    log = RunLog(Path(cfg.output_dir) / "runlog.jsonl", fsync=cfg.fsync)
    pos = world.stage.commanded
    log.append("find_sweet_spot", [res.x_star, pos.y, pos.z])
    log.close()


@qcal.command()
@click.option("--lengths", required=True,
              help="Comma-separated Clifford sequence lengths (e.g. 1,4,16,64).")
@click.option("--n-random", type=int, default=20, show_default=True,
              help="Random sequences per length.")
@click.option("--shots", type=int, default=1000, show_default=True)
@click.option("--solenoid", type=float, default=0.025, show_default=True)
@click.option("--position", default="-72.5,0,-200", show_default=True)
@click.option("--native-fidelity", type=float, default=NATIVE_GATE_FIDELITY,
              show_default=True, help="Injected native gate fidelity.")
@click.option("--free-baseline", is_flag=True,
              help="Fit the survival asymptote instead of pinning it to the "
                   "readout calibration.")
@click.pass_context
def rb(ctx, lengths, n_random, shots, solenoid, position, native_fidelity,
       free_baseline) -> None:
    """Randomized benchmarking at one operating point."""
    try:
        lens = [int(v) for v in lengths.split(",")]
    except ValueError:
        raise click.BadParameter(f"--lengths expects integers - got {lengths!r}")
    cfg = _cfg(ctx)
    world = build_world(cfg)
    world.set_solenoid(solenoid)
    world.move_to(StagePosition(*_parse_triple(position)), compensated=True)
    obs = observe(world)
    p_dep = native_fidelity_to_p_dep(native_fidelity)
    seed_tag, rng = world.next_rng()
    counts = []
    for n in lens:
        total = 0
        for _ in range(n_random):
            seq = rb_generate(rng, n)
            total += rb_simulate(seq, p_dep, shots, visibility=obs.visibility,
                                 baseline=obs.baseline, rng=rng)
        counts.append(total)
    shots_total = n_random * shots
    survivals = [c / shots_total for c in counts]
    baseline = None if free_baseline else obs.baseline + obs.visibility / 2.0
    try:
        fit = rb_fit(lens, survivals, baseline=baseline)
    except MaglabError as e:
        raise click.ClickException(str(e))
    if not fit.converged:
        raise click.ClickException("benchmarking fit did not converge")
    click.echo(f"alpha = {fit.params['alpha']:.6f} +- {fit.errors['alpha']:.6f}")
    click.echo(f"F_Clifford = {fit.params['f_clifford'] * 100:.4f}%")
    click.echo(f"F_native   = {fit.params['f_native'] * 100:.4f}%")

    record = RunRecord(
        kind="rb",
        sweep_values=tuple(float(n) for n in lens),
        counts=tuple(counts),
        shots=shots_total,
        position=world.stage.commanded,
        rng_seed=seed_tag,
        timestamp=_utc_now(),
        meta={"n_random": n_random, "p_dep": p_dep},
    )
    run_id = f"rb-{seed_tag.replace(':', '-')}"
    fits = {"rb": {k: float(v) for k, v in fit.params.items()}}
    path = write_payload(cfg.output_dir, run_id, record_to_dict(record, fits=fits))
    log = RunLog(Path(cfg.output_dir) / "runlog.jsonl", fsync=cfg.fsync)
    log.append("experiment:rb", record.position, seed=seed_tag, payload_path=path)
    log.close()
    click.echo(f"run id: {run_id}")


@qcal.command()
@click.option("--run", "run_id", required=True, help="Run id to export.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Destination CSV path.")
@click.pass_context
def export(ctx, run_id, out_path) -> None:
    """Export one run's trace as CSV (sweep_value,counts,shots,p_blockade)."""
    cfg = _cfg(ctx)
    try:
        payload = load_payload(cfg.output_dir, run_id)
    except FileNotFoundError as e:
        raise click.ClickException(str(e))
    path = export_trace_csv(payload, out_path)
    click.echo(path)


@qcal.command()
@click.option("--run", "run_id", required=True, help="Run id to plot.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="PNG path (default: <output_dir>/plots/<run>.png).")
@click.pass_context
def plot(ctx, run_id, out_path) -> None:
    """Render one run's trace to a static PNG."""
    cfg = _cfg(ctx)
    try:
        payload = load_payload(cfg.output_dir, run_id)
    except FileNotFoundError as e:
        raise click.ClickException(str(e))
    try:
        import matplotlib
    except ImportError:
        raise click.ClickException("matplotlib is not installed (pip install maglab[plot])")
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sweep = np.asarray(payload["sweep_values"], dtype=float)
    p = np.asarray(payload["counts"], dtype=float) / payload["shots"]
    kind = payload.get("kind", "trace")
    xlabel = {
        "spectroscopy": "drive frequency (Hz)",
        "rabi": "pulse duration (s)",
        "ramsey": "free evolution time (s)",
        "hahn": "total evolution time (s)",
        "rb": "Clifford sequence length",
    }.get(kind, "sweep value")

    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(sweep, p, "o-", ms=3, lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("blockade probability")
    ax.set_title(f"{kind} run {run_id}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    dest = Path(out_path) if out_path else Path(cfg.output_dir) / "plots" / f"{run_id}.png"
    dest.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(dest, dpi=130)
    plt.close(fig)
    click.echo(str(dest))


if __name__ == "__main__":
    sys.exit(qcal())
