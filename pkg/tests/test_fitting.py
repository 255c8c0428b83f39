"""Estimator checks on synthetic records with known truth."""

import numpy as np
import pytest

from maglab.errors import CalibrationError
from maglab.fitting import (
    FitResult,
    fit_decay,
    fit_exponential,
    fit_oscillation,
    fit_resonance,
    no_detection,
    peak_centers,
    track_moving_peak,
)
from maglab.magnetics import StagePosition
from maglab.virtlab import (
    RunRecord,
    excitation_probability,
    hahn_probability,
    rabi_probability,
    ramsey_probability,
)


def make_record(kind, sweep_values, p, shots, meta=None):
    """Infinite-shot record: counts are the rounded expectation."""
    counts = tuple(int(round(min(max(v, 0.0), 1.0) * shots)) for v in np.asarray(p))
    return RunRecord(
        kind=kind,
        sweep_values=tuple(float(v) for v in sweep_values),
        counts=counts,
        shots=shots,
        position=StagePosition(0.0, 0.0, -160.0),
        rng_seed="0:0",
        timestamp="1970-01-01T00:00:00.000000Z",
        meta=meta or {},
    )


# -- FitResult ----------------------------------------------------------------


def test_fit_result_rejects_negative_errors():
    with pytest.raises(ValueError):
        FitResult("m", {"a": 1.0}, {"a": -0.1}, 0.0, converged=True)


def test_no_detection_result():
    r = no_detection("resonance")
    assert not r.detected and not r.converged
    assert peak_centers(r) == []


# -- resonance ----------------------------------------------------------------


def test_fit_resonance_recovers_single_peak():
    f0, t_p = 80.0e6, 0.5e-6
    f = np.linspace(60e6, 100e6, 161)
    p = 0.15 + 0.6 * excitation_probability(1.0 / (2 * t_p), f - f0, t_p)
    rec = make_record("spectroscopy", f, p, 4000, meta={"pulse_duration": t_p})
    fit = fit_resonance(rec, max_peaks=1)
    assert fit.converged and fit.detected
    centers = peak_centers(fit)
    assert len(centers) == 1
    assert centers[0][0] == pytest.approx(f0, abs=0.2e6)
    assert fit.params["baseline"] == pytest.approx(0.15, abs=0.01)


def test_fit_resonance_orders_peaks_strongest_first():
    t_p = 0.5e-6
    f = np.linspace(40e6, 160e6, 241)
    w = 1.0 / (2 * t_p)
    # weaker line first in frequency, stronger second
    p = (0.12 + 0.25 * excitation_probability(w, f - 70e6, t_p)
         + 0.55 * excitation_probability(w, f - 130e6, t_p))
    rec = make_record("spectroscopy", f, p, 4000, meta={"pulse_duration": t_p})
    fit = fit_resonance(rec, max_peaks=2)
    centers = peak_centers(fit)
    assert len(centers) == 2
    assert centers[0][0] == pytest.approx(130e6, abs=0.5e6)
    assert centers[1][0] == pytest.approx(70e6, abs=0.5e6)
    assert centers[0][1] > centers[1][1]


def test_fit_resonance_flat_trace_is_no_detection():
    f = np.linspace(60e6, 100e6, 81)
    rec = make_record("spectroscopy", f, np.full_like(f, 0.15), 500)
    fit = fit_resonance(rec)
    assert not fit.detected


def test_fit_resonance_input_validation():
    f = np.linspace(0, 1e-6, 16)
    rec = make_record("rabi", f, np.full_like(f, 0.2), 100)
    with pytest.raises(CalibrationError):
        fit_resonance(rec)
    spec = make_record("spectroscopy", np.linspace(1e6, 2e6, 16), np.full(16, 0.2), 100)
    with pytest.raises(ValueError):
        fit_resonance(spec, lineshape="gaussian")


def test_track_moving_peak_rejects_stationary_line():
    def res(cands):
        params = {"baseline": 0.15}
        errors = {"baseline": 0.0}
        for k, (c, a) in enumerate(cands):
            params.update({f"center_{k}": c, f"width_{k}": 1e6, f"amp_{k}": a})
            errors.update({f"center_{k}": 1e4, f"width_{k}": 0.0, f"amp_{k}": 0.0})
        return FitResult("resonance", params, errors, 1.0, converged=True)

    stat = 130.0e6
    fits = [
        res([(50.0e6, 0.5), (stat, 0.9)]),   # parasitic line stronger on purpose
        res([(70.0e6, 0.5), (stat + 0.2e6, 0.9)]),
        res([(stat - 0.1e6, 0.9)]),          # only the parasitic line here
        res([(90.0e6, 0.5)]),
    ]
    tracked = track_moving_peak([0.0, 1.0, 2.0, 3.0], fits)
    assert tracked == [(0.0, 50.0e6), (1.0, 70.0e6), (3.0, 90.0e6)]


def test_track_moving_peak_keeps_everything_without_cluster():
    def res(c):
        return FitResult("resonance",
                         {"baseline": 0.1, "center_0": c, "width_0": 1e6, "amp_0": 0.5},
                         {"baseline": 0.0, "center_0": 1e4, "width_0": 0.0, "amp_0": 0.0},
                         1.0, converged=True)

    fits = [res(50e6), res(75e6), res(100e6)]
    tracked = track_moving_peak([0.0, 1.0, 2.0], fits)
    assert [c for _, c in tracked] == [50e6, 75e6, 100e6]


# -- decays -------------------------------------------------------------------


def test_fit_decay_ramsey_recovers_t2():
    t2, f_d, vis, base = 12.0e-6, 0.15e6, 0.55, 0.17
    t = np.linspace(0.0, 4.0 * t2, 60)
    p = ramsey_probability(t, f_d, t2, vis, base)
    rec = make_record("ramsey", t, p, 20000, meta={"detuning": f_d})
    fit = fit_decay(rec, "ramsey")
    assert fit.converged
    assert fit.params["t2"] == pytest.approx(t2, rel=0.02)
    assert fit.params["frequency"] == pytest.approx(f_d, rel=0.02)
    assert fit.params["exponent"] == 2.0
    assert fit.params["visibility"] == pytest.approx(vis, abs=0.02)


def test_fit_decay_hahn_recovers_t2_and_exponent():
    t2, vis, base = 80.0e-6, 0.55, 0.17
    t = np.linspace(0.0, 4.0 * t2, 50)
    p = hahn_probability(t, t2, vis, base, exponent=1.5)
    rec = make_record("hahn", t, p, 20000)
    fit = fit_decay(rec, "hahn")
    assert fit.converged
    assert fit.params["t2"] == pytest.approx(t2, rel=0.03)
    assert fit.params["exponent"] == pytest.approx(1.5, abs=0.15)


def test_fit_decay_flags_undecayed_trace():
    t2 = 100.0e-6
    t = np.linspace(0.0, t2 / 1000.0, 30)  # trace never decays in-window
    p = hahn_probability(t, t2, 0.6, 0.15)
    rec = make_record("hahn", t, p, 5000)
    fit = fit_decay(rec, "hahn")
    assert not fit.converged
    assert fit.meta.get("t2_unbounded") is True


def test_fit_decay_validation():
    t = np.linspace(0, 1e-5, 5)
    rec = make_record("ramsey", t, np.full_like(t, 0.5), 100)
    with pytest.raises(CalibrationError):
        fit_decay(rec, "ramsey")
    rec8 = make_record("ramsey", np.linspace(0, 1e-5, 8), np.full(8, 0.5), 100)
    with pytest.raises(ValueError):
        fit_decay(rec8, "exponential_thing")


# -- oscillation --------------------------------------------------------------


def test_fit_oscillation_recovers_frequency():
    f_r, vis, base = 3.3e6, 0.6, 0.18
    t = np.linspace(0.0, 3.5 / f_r, 61)
    p = rabi_probability(t, f_r, vis, base)
    rec = make_record("rabi", t, p, 8000)
    fit = fit_oscillation(rec)
    assert fit.converged
    assert fit.params["frequency"] == pytest.approx(f_r, rel=0.01)
    assert fit.params["visibility"] == pytest.approx(vis, abs=0.02)
    assert fit.params["baseline"] == pytest.approx(base, abs=0.02)


def test_fit_oscillation_seed_not_at_half_frequency():
    """Many-period trace: a seed at f/2 would lock into a local minimum."""
    f_r = 5.0e6
    t = np.linspace(0.0, 8.0 / f_r, 161)
    p = rabi_probability(t, f_r, 0.5, 0.2)
    rec = make_record("rabi", t, p, 8000)
    fit = fit_oscillation(rec)
    assert fit.params["frequency"] == pytest.approx(f_r, rel=0.005)


# -- exponential --------------------------------------------------------------


def test_fit_exponential_free_baseline_deep_decay():
    alpha, a, b = 0.95, 0.40, 0.575
    n = np.arange(1, 129, 3)
    y = a * alpha**n + b
    fit = fit_exponential(n, y)
    assert fit.converged
    assert fit.params["alpha"] == pytest.approx(alpha, abs=1e-6)
    assert fit.params["a"] == pytest.approx(a, abs=1e-6)
    assert fit.params["b"] == pytest.approx(b, abs=1e-6)


def test_fit_exponential_fixed_baseline_shallow_decay():
    # 1/e length ~ 810 at this alpha, far beyond the max sequence length;
    # pinning b removes the alpha-b degeneracy
    alpha, a, b = 0.99877, 0.40, 0.575
    n = np.arange(1, 129, 3)
    y = a * alpha**n + b
    fit = fit_exponential(n, y, baseline=b)
    assert fit.converged
    assert fit.meta["baseline_fixed"] is True
    assert fit.params["b"] == b and fit.errors["b"] == 0.0
    assert fit.params["alpha"] == pytest.approx(alpha, abs=2e-6)


def test_fit_exponential_needs_four_lengths():
    with pytest.raises(CalibrationError):
        fit_exponential([1, 2, 3], [0.9, 0.8, 0.7])
    with pytest.raises(CalibrationError):
        fit_exponential([1, 1, 2, 2], [0.9, 0.9, 0.8, 0.8])
