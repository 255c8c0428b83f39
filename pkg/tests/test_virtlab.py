"""Virtual experiments: lineshapes, shot sampling, reproducibility."""

import numpy as np
import pytest

from maglab.magnetics import StagePosition
from maglab.virtlab import (
    SPURIOUS_LINE_HZ,
    TRACE_HEADER,
    QubitObservables,
    RunRecord,
    SpectroscopySweep,
    excitation_probability,
    hahn_probability,
    observe,
    rabi_probability,
    ramsey_probability,
    run_hahn_echo,
    run_rabi,
    run_ramsey,
    run_spectroscopy,
)
from maglab.world import World


# -- pure lineshapes ----------------------------------------------------------


def test_excitation_probability_on_resonance():
    f_r = 1.0e6
    t_pi = 0.5 / f_r
    assert excitation_probability(f_r, 0.0, t_pi) == pytest.approx(1.0)
    assert excitation_probability(f_r, 0.0, t_pi / 2.0) == pytest.approx(0.5)


def test_excitation_probability_detuned_peak_height():
    f_r = 1.0e6
    d = 2.0e6
    # amplitude factor f_R^2/(f_R^2+d^2), reached whenever the sine is 1
    env = f_r**2 / (f_r**2 + d**2)
    t = 0.5 / np.sqrt(f_r**2 + d**2)
    assert excitation_probability(f_r, d, t) == pytest.approx(env)
    assert excitation_probability(0.0, d, t) == 0.0


def test_ramsey_probability_limits():
    v, b = 0.6, 0.2
    assert ramsey_probability(0.0, 1e5, 10e-6, v, b) == pytest.approx(b + v)
    late = ramsey_probability(1.0, 1e5, 10e-6, v, b)
    assert late == pytest.approx(b + v / 2.0)
    # Gaussian envelope: 1/e^1 of the oscillation amplitude at t = T2*
    at_t2 = ramsey_probability(10e-6, 0.0, 10e-6, v, b)
    assert at_t2 == pytest.approx(b + 0.5 * v * (1.0 + np.exp(-1.0)))


def test_hahn_probability_limits():
    v, b = 0.6, 0.2
    assert hahn_probability(0.0, 50e-6, v, b) == pytest.approx(b + v)
    assert hahn_probability(50e-6, 50e-6, v, b) == pytest.approx(b + 0.5 * v * (1 + np.exp(-1.0)))
    assert hahn_probability(1.0, 50e-6, v, b) == pytest.approx(b + v / 2.0)


def test_rabi_probability_period():
    f = 2.0e6
    t = np.array([0.0, 0.25 / f, 0.5 / f, 1.0 / f])
    p = rabi_probability(t, f, 0.7, 0.1)
    assert p[0] == pytest.approx(0.1)
    assert p[1] == pytest.approx(0.45)  # half rotation
    assert p[2] == pytest.approx(0.8)   # pi pulse at t = 1/(2f)
    assert p[3] == pytest.approx(0.1, abs=1e-12)  # full period


# -- records ------------------------------------------------------------------


def test_run_record_validation():
    with pytest.raises(ValueError):
        RunRecord("x", (1.0, 2.0), (5,), 10, StagePosition(0, 0, -160), "s", "t")
    with pytest.raises(ValueError):
        RunRecord("x", (1.0,), (11,), 10, StagePosition(0, 0, -160), "s", "t")
    rec = RunRecord("x", (1.0, 2.0), (5, 10), 10, StagePosition(0, 0, -160), "s", "t")
    assert np.allclose(rec.p_blockade, [0.5, 1.0])


def test_sweep_validation():
    with pytest.raises(ValueError):
        SpectroscopySweep(f_grid=())
    with pytest.raises(ValueError):
        SpectroscopySweep(f_grid=(2.0e6, 1.0e6))
    with pytest.raises(ValueError):
        SpectroscopySweep(f_grid=(1.0e6, 2.0e6), shots_per_point=0)
    s = SpectroscopySweep.around(100e6, 20e6, n_points=21)
    assert len(s.f_grid) == 21
    assert s.f_grid[0] == pytest.approx(90e6)
    assert s.f_grid[-1] == pytest.approx(110e6)


def test_trace_header_contract():
    assert TRACE_HEADER == ("sweep_value", "counts", "shots", "p_blockade")


# -- sampled runs -------------------------------------------------------------


def test_observe_returns_consistent_snapshot(world):
    obs = observe(world)
    assert isinstance(obs, QubitObservables)
    assert obs.f_larmor == pytest.approx(world.larmor_truth())
    assert obs.theta_deg == pytest.approx(world.angle_truth())
    assert obs.t2_hahn > obs.t2_star > 0
    assert 0 < obs.visibility <= 1 and 0 <= obs.baseline < 1


def test_same_seed_reproduces_counts():
    w1 = World.default(master_seed=77)
    w2 = World.default(master_seed=77)
    s = SpectroscopySweep.around(50e6, 30e6, n_points=41, shots_per_point=100)
    r1 = run_spectroscopy(w1, s)
    r2 = run_spectroscopy(w2, s)
    assert r1.counts == r2.counts
    assert r1.rng_seed == r2.rng_seed == "77:0"
    # a second run on the same world draws the next stream
    r3 = run_spectroscopy(w1, s)
    assert r3.rng_seed == "77:1"
    assert r3.counts != r1.counts


def test_rng_tag_rebuilds_generator():
    w = World.default(master_seed=123)
    tag, gen = w.next_rng()
    a = gen.integers(0, 1 << 30, size=5)
    b = World.rng_from_tag(tag).integers(0, 1 << 30, size=5)
    assert np.array_equal(a, b)


def test_spectroscopy_peak_near_larmor(world):
    world.set_solenoid(0.025)
    obs = observe(world)
    sweep = SpectroscopySweep.around(obs.f_larmor, 30e6, n_points=151,
                                     shots_per_point=400, pulse_duration=0.5e-6)
    rec = run_spectroscopy(world, sweep)
    assert rec.kind == "spectroscopy"
    assert rec.shots == 400
    f = np.asarray(rec.sweep_values)
    peak_f = f[int(np.argmax(rec.p_blockade))]
    assert abs(peak_f - obs.f_larmor) < 2.0e6
    assert rec.meta["f_larmor_truth"] == pytest.approx(obs.f_larmor)


def test_spurious_line_appears_when_enabled():
    w = World.default(master_seed=9)
    w.spurious_line_hz = SPURIOUS_LINE_HZ
    w.set_solenoid(0.025)
    sweep = SpectroscopySweep.around(SPURIOUS_LINE_HZ, 16e6, n_points=81,
                                     shots_per_point=800)
    rec = run_spectroscopy(w, sweep)
    f = np.asarray(rec.sweep_values)
    p = rec.p_blockade
    near = p[np.abs(f - SPURIOUS_LINE_HZ) < 2e6].max()
    far = np.median(p[np.abs(f - SPURIOUS_LINE_HZ) > 6e6])
    assert near > far + 0.05

    w_off = World.default(master_seed=9)
    w_off.set_solenoid(0.025)
    rec_off = run_spectroscopy(w_off, sweep)
    p_off = rec_off.p_blockade
    near_off = p_off[np.abs(f - SPURIOUS_LINE_HZ) < 2e6].max()
    assert near_off < near - 0.05


def test_rabi_oscillation_matches_expected_frequency(world):
    world.set_solenoid(0.025)
    obs = observe(world)
    from maglab.spinmodel import rabi_frequency

    f_r = rabi_frequency(world.qubit, obs.f_larmor, 1.0, obs.theta_deg)
    t = np.linspace(0.0, 3.0 / f_r, 121)
    rec = run_rabi(world, t, 1.0, shots=2000)
    assert rec.meta["f_rabi_truth"] == pytest.approx(f_r)
    # infinite-shot model at the first pi pulse
    i_pi = int(np.argmin(np.abs(t - 0.5 / f_r)))
    assert rec.p_blockade[i_pi] > rec.p_blockade[0] + 0.3


def test_ramsey_and_hahn_decay_toward_midpoint(world):
    world.set_solenoid(0.025)
    obs = observe(world)
    t_r = np.linspace(0.0, 6.0 * obs.t2_star, 40)
    rec_r = run_ramsey(world, t_r, detuning=0.15e6, shots=3000)
    mid = obs.baseline + obs.visibility / 2.0
    assert abs(float(np.mean(rec_r.p_blockade[-5:])) - mid) < 0.05
    assert rec_r.meta["t2_star_truth"] == pytest.approx(obs.t2_star)

    t_h = np.linspace(0.0, 6.0 * obs.t2_hahn, 40)
    rec_h = run_hahn_echo(world, t_h, shots=3000)
    assert rec_h.p_blockade[0] > mid + 0.2
    assert abs(float(np.mean(rec_h.p_blockade[-5:])) - mid) < 0.05


def test_positions_recorded_are_commanded_not_true(world):
    target = StagePosition(-10.0, 0.0, -160.0)
    world.move_to(target)
    rec = run_rabi(world, np.linspace(0, 1e-6, 10), 1.0, shots=10)
    assert rec.position == target
    assert rec.meta["true_position"] != target


def test_drift_disabled_by_default(world):
    world.set_solenoid(0.025)
    s = SpectroscopySweep.around(observe(world).f_larmor, 10e6, n_points=11,
                                 shots_per_point=50)
    r1 = run_spectroscopy(world, s)
    w2 = World.default(master_seed=world.master_seed)
    w2.set_solenoid(0.025)
    r2 = run_spectroscopy(w2, s)
    assert r1.counts == r2.counts


def test_drift_walks_the_line():
    w = World.default(master_seed=4)
    w.set_solenoid(0.025)
    w.drift_amplitude_hz = 2.0e5
    s = SpectroscopySweep.around(observe(w).f_larmor, 10e6, n_points=11, shots_per_point=50)
    run_spectroscopy(w, s)
    first = w.drift_offset_hz
    run_spectroscopy(w, s)
    assert w.drift_offset_hz != first
