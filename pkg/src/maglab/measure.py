"""Composite measurement routines built from runs plus fits.

measure_larmor is the workhorse of every scenario: pick a drive window from
the previous point's answer (experimenter knowledge, never simulation truth),
set the drive amplitude so the expected pulse is a pi pulse, run spectroscopy,
and fit the peak center.
"""

from __future__ import annotations

from dataclasses import dataclass

from maglab.fitting import FitResult, fit_resonance, no_detection, peak_centers
from maglab.virtlab import RunRecord, SpectroscopySweep, run_spectroscopy
from maglab.world import World

#: widest drive band the virtual source covers, Hz
BAND_LO = 1.0e6
BAND_HI = 320.0e6


@dataclass(frozen=True)
class LarmorMeasurement:
    f_center: float
    f_err: float
    fit: FitResult
    record: RunRecord
    rescanned: bool


def _pi_pulse_amplitude(f_hint: float, pulse_duration: float, eta0: float) -> float:
    """Drive amplitude that makes the expected Rabi rate a pi pulse."""
    f_rabi_target = 0.5 / pulse_duration
    return f_rabi_target / (eta0 * max(f_hint, BAND_LO))


def _scan(world: World, lo: float, hi: float, n: int, t_p: float,
          amplitude: float, shots: int) -> RunRecord:
    lo = max(lo, BAND_LO)
    hi = min(max(hi, lo + 1.0), BAND_HI)
    step = (hi - lo) / (n - 1)
    grid = tuple(lo + i * step for i in range(n))
    sweep = SpectroscopySweep(
        f_grid=grid, pulse_duration=t_p, drive_amplitude=amplitude, shots_per_point=shots
    )
    return run_spectroscopy(world, sweep)


def measure_larmor(
    world: World,
    f_hint: float | None,
    shots: int = 200,
    pulse_duration: float = 0.5e-6,
    window_hz: float | None = None,
    fine_points: int = 81,
    wide_band: tuple[float, float] = (BAND_LO, BAND_HI),
    max_peaks: int = 1,
) -> LarmorMeasurement:
    """Measure the Larmor frequency near a prior estimate.

    Scans a window around f_hint; if no peak is found or the fitted center
    pins to the window edge, falls back to one wide scan over wide_band and
    retries with the detected coarse peak. Linewidth is set by the pulse
    duration, so the window defaults to a couple dozen linewidths.
    """
    eta0 = world.qubit.eta0
    linewidth = 1.0 / (2.0 * pulse_duration)
    window = window_hz if window_hz is not None else 24.0 * linewidth

    ok = False
    rescanned = False
    fit = no_detection("resonance")
    centers = []
    rec = None
    if f_hint is not None:
        amplitude = _pi_pulse_amplitude(f_hint, pulse_duration, eta0)
        rec = _scan(world, f_hint - window / 2, f_hint + window / 2,
                    fine_points, pulse_duration, amplitude, shots)
        fit = fit_resonance(rec, max_peaks=max_peaks)
        centers = peak_centers(fit)
        grid_lo, grid_hi = rec.sweep_values[0], rec.sweep_values[-1]
        edge = 0.05 * (grid_hi - grid_lo)
        ok = (
            fit.converged
            and centers
            and grid_lo + edge < centers[0][0] < grid_hi - edge
        )
    if not ok:
        # wide survey at coarse resolution to relocate the line
        rescanned = True
        n_wide = int(min(600, max(200, (wide_band[1] - wide_band[0]) / linewidth)))
        mid = (wide_band[0] * wide_band[1]) ** 0.5
        wide = _scan(world, wide_band[0], wide_band[1], n_wide,
                     pulse_duration, _pi_pulse_amplitude(mid, pulse_duration, eta0),
                     max(shots // 2, 50))
        wide_fit = fit_resonance(wide, max_peaks=max_peaks)
        wide_centers = peak_centers(wide_fit)
        if not wide_centers:
            return LarmorMeasurement(float("nan"), float("nan"),
                                     no_detection("resonance"), wide, rescanned)
        f_hint = wide_centers[0][0]
        amplitude = _pi_pulse_amplitude(f_hint, pulse_duration, eta0)
        rec = _scan(world, f_hint - window / 2, f_hint + window / 2,
                    fine_points, pulse_duration, amplitude, shots)
        fit = fit_resonance(rec, max_peaks=max_peaks)
        centers = peak_centers(fit)
        if not (fit.converged and centers):
            return LarmorMeasurement(float("nan"), float("nan"), fit, rec, rescanned)
    center = centers[0][0]
    err = fit.error("center_0")
    return LarmorMeasurement(center, err, fit, rec, rescanned)
