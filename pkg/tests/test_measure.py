"""Composite Larmor measurement: windowed scan, rescue rescan, failure modes."""

import math

import numpy as np
import pytest

from maglab.defaults import PARKED_POSITION
from maglab.measure import BAND_HI, BAND_LO, _pi_pulse_amplitude, measure_larmor
from maglab.world import World


def test_pi_pulse_amplitude_targets_half_period():
    t_p = 0.5e-6
    eta0 = 0.02
    f = 80.0e6
    amp = _pi_pulse_amplitude(f, t_p, eta0)
    assert eta0 * f * amp == pytest.approx(0.5 / t_p)
    # hint below the band floor is clamped so the amplitude stays finite
    assert _pi_pulse_amplitude(0.0, t_p, eta0) == _pi_pulse_amplitude(BAND_LO, t_p, eta0)


def test_measure_larmor_with_good_hint(world):
    world.set_solenoid(0.025)
    truth = world.larmor_truth()
    m = measure_larmor(world, truth * 1.02, shots=300)
    assert not m.rescanned
    assert m.fit.converged
    assert abs(m.f_center - truth) < 1.5e6
    assert m.f_err < 1e6
    assert m.record.kind == "spectroscopy"


def test_measure_larmor_rescues_bad_hint(world):
    world.set_solenoid(0.025)
    truth = world.larmor_truth()
    # hint far outside the fine window: wide rescan must relocate the line
    m = measure_larmor(world, truth + 120e6, shots=300)
    assert m.rescanned
    assert abs(m.f_center - truth) < 2.0e6


def test_measure_larmor_none_hint_goes_wide(world):
    world.set_solenoid(0.025)
    truth = world.larmor_truth()
    m = measure_larmor(world, None, shots=300)
    assert m.rescanned
    assert abs(m.f_center - truth) < 2.0e6


def test_measure_larmor_no_line_returns_nan():
    w = World.default(master_seed=11)
    w.move_to(PARKED_POSITION)
    # solenoid off and magnet parked: the line sits below the drive band
    assert w.larmor_truth() < BAND_LO
    m = measure_larmor(w, 50e6, shots=100)
    assert math.isnan(m.f_center)
    assert not m.fit.detected
    assert m.rescanned


def test_measure_larmor_window_scales_with_pulse_duration(world):
    world.set_solenoid(0.025)
    truth = world.larmor_truth()
    m = measure_larmor(world, truth, shots=300, pulse_duration=4.0e-6)
    span = m.record.sweep_values[-1] - m.record.sweep_values[0]
    # 24 linewidths at 1/(2 t_p) = 125 kHz
    assert span == pytest.approx(24.0 * 0.125e6, rel=0.05)
    assert abs(m.f_center - truth) < 0.3e6


def test_measure_larmor_respects_band_edges(world):
    world.set_solenoid(0.025)
    m = measure_larmor(world, BAND_LO * 1.5, shots=100, window_hz=20e6)
    grid = np.asarray(m.record.sweep_values)
    assert grid[0] >= BAND_LO
    assert grid[-1] <= BAND_HI
