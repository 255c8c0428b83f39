"""Shot-sampled virtual experiments: spectroscopy, Rabi, Ramsey, Hahn echo.

Each run reads the qubit observables at the current magnet position, maps
them through the readout visibility model, and samples binomial blockade
counts. The pure probability functions are exposed separately so estimators
and tests can reason about the infinite-shot limit.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field

import numpy as np

from maglab.magnetics import StagePosition
from maglab.spinmodel import (
    coherence_times,
    larmor_frequency,
    out_of_plane_angle,
    rabi_frequency,
    readout_visibility,
)
from maglab.world import World

#: parasitic resonator line seen in the raw spectroscopy data, Hz
SPURIOUS_LINE_HZ = 130.0e6
SPURIOUS_AMPLITUDE = 0.25

TRACE_HEADER = ("sweep_value", "counts", "shots", "p_blockade")


@dataclass(frozen=True)
class SpectroscopySweep:
    """Drive-frequency sweep at fixed pulse parameters."""

    f_grid: tuple[float, ...]
    pulse_duration: float = 0.5e-6
    drive_amplitude: float = 1.0
    shots_per_point: int = 200

    def __post_init__(self) -> None:
        if len(self.f_grid) == 0:
            raise ValueError("empty drive-frequency grid")
        grid = tuple(float(f) for f in self.f_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("drive-frequency grid must be sorted ascending")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be >= 1")
        if self.pulse_duration <= 0:
            raise ValueError("pulse_duration must be positive")
        object.__setattr__(self, "f_grid", grid)

    @classmethod
    def around(
        cls,
        center_hz: float,
        span_hz: float,
        n_points: int = 81,
        **kwargs,
    ) -> "SpectroscopySweep":
        lo = max(center_hz - span_hz / 2, 1e5)
        grid = tuple(np.linspace(lo, lo + span_hz, n_points))
        return cls(f_grid=grid, **kwargs)


@dataclass(frozen=True)
class RunRecord:
    """Raw outcome of one experiment run: sweep values and blockade counts."""

    kind: str
    sweep_values: tuple[float, ...]
    counts: tuple[int, ...]
    shots: int
    position: StagePosition
    rng_seed: str
    timestamp: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(c < 0 or c > self.shots for c in self.counts):
            raise ValueError("counts must lie in [0, shots]")
        if len(self.counts) != len(self.sweep_values):
            raise ValueError("counts and sweep_values must align")

    @property
    def p_blockade(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.shots


def _now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


# -- pure lineshapes --------------------------------------------------------


def excitation_probability(f_rabi: float, detuning_hz, pulse_duration: float):
    """Coherent detuned drive: (f_R^2/(f_R^2+d^2)) sin^2(pi sqrt(f_R^2+d^2) t)."""
    d = np.asarray(detuning_hz, dtype=float)
    if f_rabi <= 0:
        return np.zeros_like(d)
    omega2 = f_rabi**2 + d**2
    return (f_rabi**2 / omega2) * np.sin(np.pi * np.sqrt(omega2) * pulse_duration) ** 2


def ramsey_probability(t_wait, f_detune: float, t2_star: float, visibility: float,
                       baseline: float, exponent: float = 2.0):
    t = np.asarray(t_wait, dtype=float)
    env = np.exp(-((t / t2_star) ** exponent))
    return baseline + 0.5 * visibility * (1.0 + np.cos(2 * np.pi * f_detune * t) * env)


def hahn_probability(t_wait, t2_hahn: float, visibility: float, baseline: float,
                     exponent: float = 1.5):
    t = np.asarray(t_wait, dtype=float)
    return baseline + 0.5 * visibility * (1.0 + np.exp(-((t / t2_hahn) ** exponent)))


def rabi_probability(durations, f_rabi: float, visibility: float, baseline: float):
    t = np.asarray(durations, dtype=float)
    return baseline + visibility * np.sin(np.pi * f_rabi * t) ** 2


# -- observables snapshot ----------------------------------------------------


@dataclass(frozen=True)
class QubitObservables:
    f_larmor: float
    theta_deg: float
    t2_star: float
    t2_hahn: float
    visibility: float
    baseline: float


def observe(world: World) -> QubitObservables:
    """Noise-free qubit observables at the current world configuration."""
    b = world.field_at_sample()
    f_l = larmor_frequency(world.qubit.g, b)
    theta = out_of_plane_angle(b, world.qubit.plane_normal)
    t2s, t2h = coherence_times(world.qubit, theta)
    vis, base = readout_visibility(world.qubit, theta)
    return QubitObservables(f_l, theta, t2s, t2h, vis, base)


def _sample(world: World, kind: str, sweep_values, p_model, shots: int, meta: dict) -> RunRecord:
    seed, rng = world.next_rng()
    p = np.clip(np.asarray(p_model, dtype=float), 0.0, 1.0)
    counts = rng.binomial(shots, p)
    return RunRecord(
        kind=kind,
        sweep_values=tuple(float(v) for v in sweep_values),
        counts=tuple(int(c) for c in counts),
        shots=shots,
        position=world.stage.commanded,
        rng_seed=seed,
        timestamp=_now_iso(),
        meta=meta,
    )


# -- experiments -------------------------------------------------------------


def run_spectroscopy(world: World, sweep: SpectroscopySweep) -> RunRecord:
    obs = observe(world)
    f_l = obs.f_larmor
    if world.drift_amplitude_hz > 0.0:
        _, drift_rng = world.next_rng()
        f_l += world.advance_drift(drift_rng)
    f_r = rabi_frequency(world.qubit, f_l, sweep.drive_amplitude, obs.theta_deg)
    grid = np.asarray(sweep.f_grid)
    p_exc = excitation_probability(f_r, grid - f_l, sweep.pulse_duration)
    p = obs.baseline + obs.visibility * p_exc
    if world.spurious_line_hz is not None:
        # fixed readout-resonator feature, independent of magnet position
        p_sp = excitation_probability(
            f_r if f_r > 0 else 1.0 / (2 * sweep.pulse_duration),
            grid - world.spurious_line_hz,
            sweep.pulse_duration,
        )
        p = p + obs.visibility * SPURIOUS_AMPLITUDE * p_sp
    meta = {
        "f_larmor_truth": obs.f_larmor,
        "f_rabi": f_r,
        "theta_truth_deg": obs.theta_deg,
        "pulse_duration": sweep.pulse_duration,
        "drive_amplitude": sweep.drive_amplitude,
        "true_position": world.stage.true_pos,
    }
    return _sample(world, "spectroscopy", sweep.f_grid, p, sweep.shots_per_point, meta)


def run_rabi(world: World, durations, amplitude: float, shots: int) -> RunRecord:
    obs = observe(world)
    f_r = rabi_frequency(world.qubit, obs.f_larmor, amplitude, obs.theta_deg)
    p = rabi_probability(durations, f_r, obs.visibility, obs.baseline)
    meta = {
        "f_rabi_truth": f_r,
        "drive_amplitude": amplitude,
        "theta_truth_deg": obs.theta_deg,
        "true_position": world.stage.true_pos,
    }
    return _sample(world, "rabi", durations, p, shots, meta)


def run_ramsey(world: World, t_waits, detuning: float, shots: int) -> RunRecord:
    obs = observe(world)
    p = ramsey_probability(t_waits, detuning, obs.t2_star, obs.visibility, obs.baseline)
    meta = {
        "t2_star_truth": obs.t2_star,
        "detuning": detuning,
        "theta_truth_deg": obs.theta_deg,
        "true_position": world.stage.true_pos,
    }
    return _sample(world, "ramsey", t_waits, p, shots, meta)


def run_hahn_echo(world: World, t_waits, shots: int) -> RunRecord:
    obs = observe(world)
    p = hahn_probability(t_waits, obs.t2_hahn, obs.visibility, obs.baseline)
    meta = {
        "t2_hahn_truth": obs.t2_hahn,
        "theta_truth_deg": obs.theta_deg,
        "true_position": world.stage.true_pos,
    }
    return _sample(world, "hahn", t_waits, p, shots, meta)
