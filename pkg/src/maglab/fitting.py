"""Nonlinear least-squares estimators for the virtual experiments.

All fits run through scipy's trust-region reflective solver with bounded
iterations; 1-sigma uncertainties come from the scaled inverse Gauss-Newton
Hessian at the solution. Shot-noise weights are used whenever a record carries
a shot count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from maglab.errors import CalibrationError
from maglab.virtlab import (
    RunRecord,
    excitation_probability,
    hahn_probability,
    ramsey_probability,
)

MAX_ITER = 200
XTOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    """Parameter estimates with 1-sigma errors from one fit."""

    model: str
    params: dict[str, float]
    errors: dict[str, float]
    residual_rms: float
    converged: bool
    detected: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(not math.isnan(e) and e < 0 for e in self.errors.values()):
            raise ValueError("uncertainties must be non-negative")

    def param(self, name: str) -> float:
        return self.params[name]

    def error(self, name: str) -> float:
        return self.errors.get(name, float("nan"))


def no_detection(model: str, meta: dict | None = None) -> FitResult:
    return FitResult(model, {}, {}, float("nan"), converged=False,
                     detected=False, meta=meta or {})


def _shot_sigma(p: np.ndarray, shots: int) -> np.ndarray:
    # binomial std of p_hat, floored to keep weights finite at p = 0 or 1
    var = np.maximum(p * (1.0 - p), 0.25 / shots) / shots
    return np.sqrt(var)


def _solve(residual_fn, x0, bounds, param_names, model, n_data, meta=None) -> FitResult:
    res = least_squares(
        residual_fn, x0, bounds=bounds, method="trf", max_nfev=MAX_ITER * len(x0),
        xtol=XTOL, ftol=1e-12, gtol=1e-12,
    )
    dof = max(n_data - len(x0), 1)
    s2 = float(res.cost * 2.0 / dof)
    jtj = res.jac.T @ res.jac
    try:
        cov = np.linalg.inv(jtj) * s2
        sigmas = np.sqrt(np.clip(np.diag(cov), 0.0, np.inf))
    except np.linalg.LinAlgError:
        sigmas = np.full(len(x0), np.nan)
    converged = bool(res.success) and np.all(np.isfinite(res.x))
    rms = float(np.sqrt(np.mean(res.fun**2)))
    return FitResult(
        model=model,
        params={n: float(v) for n, v in zip(param_names, res.x)},
        errors={n: float(s) for n, s in zip(param_names, sigmas)},
        residual_rms=rms,
        converged=converged,
        meta=meta or {},
    )


# -- resonance ---------------------------------------------------------------


def _detect_peaks(f: np.ndarray, p: np.ndarray, sigma: np.ndarray, max_peaks: int) -> list[int]:
    """Indices of candidate peaks above the noise floor, strongest first."""
    base = float(np.median(p))
    noise = float(np.median(sigma))
    thresh = base + 4.0 * noise
    # smooth lightly so single-shot spikes do not count as peaks
    kernel = np.array([0.25, 0.5, 0.25])
    ps = np.convolve(p, kernel, mode="same")
    idx = [
        i
        for i in range(1, len(ps) - 1)
        if ps[i] >= ps[i - 1] and ps[i] >= ps[i + 1] and p[i] > thresh
    ]
    idx.sort(key=lambda i: p[i], reverse=True)
    # enforce separation of a few grid steps between retained candidates
    kept: list[int] = []
    for i in idx:
        if all(abs(i - j) > 3 for j in kept):
            kept.append(i)
        if len(kept) == max_peaks:
            break
    return kept


def fit_resonance(
    record: RunRecord,
    lineshape: str = "rabi",
    max_peaks: int = 2,
) -> FitResult:
    """Extract peak centers from a spectroscopy record.

    Fits a sum of detuned-drive lineshapes (or the Lorentzian fallback) plus
    a flat baseline. Peaks are seeded from local maxima above the shot-noise
    floor; a trace with no candidate returns a no-detection result. Peak
    parameters are reported as center_k, width_k (Rabi frequency for the
    coherent shape), amp_k, k in fit order (strongest first).
    """
    if record.kind != "spectroscopy":
        raise CalibrationError(f"expected a spectroscopy record, got {record.kind}")
    if lineshape not in ("rabi", "lorentzian"):
        raise ValueError(f"unknown lineshape {lineshape!r}")
    f = np.asarray(record.sweep_values)
    p = record.p_blockade
    sigma = _shot_sigma(p, record.shots)
    peaks = _detect_peaks(f, p, sigma, max_peaks)
    if not peaks:
        return no_detection("resonance", {"n_points": len(f)})

    t_p = float(record.meta.get("pulse_duration", 0.5e-6))
    span = float(f[-1] - f[0]) if len(f) > 1 else 1.0
    step = span / max(len(f) - 1, 1)
    base0 = float(np.median(p))
    w0 = max(1.0 / (2.0 * t_p), step)

    names = ["baseline"]
    x0 = [base0]
    lo = [0.0]
    hi = [1.0]
    for k, i in enumerate(peaks):
        names += [f"center_{k}", f"width_{k}", f"amp_{k}"]
        x0 += [float(f[i]), w0, max(float(p[i] - base0), 0.02)]
        lo += [float(f[0] - span * 0.05), step * 0.2, 0.0]
        hi += [float(f[-1] + span * 0.05), span, 1.5]

    def model_p(x):
        out = np.full_like(f, x[0], dtype=float)
        for k in range(len(peaks)):
            c, w, a = x[1 + 3 * k : 4 + 3 * k]
            if lineshape == "rabi":
                out = out + a * excitation_probability(w, f - c, t_p)
            else:
                out = out + a * w**2 / (w**2 + (f - c) ** 2)
        return out

    def resid(x):
        return (model_p(x) - p) / sigma

    result = _solve(resid, x0, (lo, hi), names, "resonance", len(f),
                    meta={"lineshape": lineshape, "n_peaks": len(peaks)})
    if not result.converged:
        return result
    # order peaks strongest-first for stable downstream selection
    order = sorted(range(len(peaks)), key=lambda k: result.params[f"amp_{k}"], reverse=True)
    if order != list(range(len(peaks))):
        remap_params = {"baseline": result.params["baseline"]}
        remap_errors = {"baseline": result.errors["baseline"]}
        for new_k, old_k in enumerate(order):
            for fieldname in ("center", "width", "amp"):
                remap_params[f"{fieldname}_{new_k}"] = result.params[f"{fieldname}_{old_k}"]
                remap_errors[f"{fieldname}_{new_k}"] = result.errors[f"{fieldname}_{old_k}"]
        result = FitResult(result.model, remap_params, remap_errors,
                           result.residual_rms, result.converged, meta=result.meta)
    return result


def peak_centers(result: FitResult) -> list[tuple[float, float]]:
    """(center, amplitude) pairs from a resonance fit, strongest first."""
    if not result.detected:
        return []
    out = []
    k = 0
    while f"center_{k}" in result.params:
        out.append((result.params[f"center_{k}"], result.params[f"amp_{k}"]))
        k += 1
    return out


def track_moving_peak(
    positions: list[float],
    fits: list[FitResult],
    stationary_tol_hz: float = 2.0e6,
) -> list[tuple[float, float]]:
    """Select the physically moving resonance across a position sweep.

    A parasitic line (e.g. the readout resonator) sits at the same frequency
    for every position; cluster all candidate centers and discard clusters
    whose spread is below stationary_tol_hz but which appear at several
    positions while another candidate exists there. Returns (position,
    f_center) for positions with a surviving detection.
    """
    all_centers: list[tuple[int, float, float]] = []
    for i, fit in enumerate(fits):
        for c, a in peak_centers(fit):
            all_centers.append((i, c, a))
    if not all_centers:
        return []
    # stationary cluster: centers within tol of the overall mode; the mode is
    # the median inside the winning histogram bin, since the bin midpoint can
    # sit several tolerances away when the bins are wide
    centers = np.array([c for _, c, _ in all_centers])
    hist_c, edges = np.histogram(centers, bins=max(8, len(positions) // 2))
    k = int(np.argmax(hist_c))
    in_bin = (centers >= edges[k]) & (centers <= edges[k + 1])
    mode_center = float(np.median(centers[in_bin]))
    in_cluster = np.abs(centers - mode_center) < stationary_tol_hz
    cluster_positions = {all_centers[j][0] for j in np.flatnonzero(in_cluster)}
    stationary = len(cluster_positions) > 0.5 * len(fits) and np.std(
        centers[in_cluster]
    ) < stationary_tol_hz

    out: list[tuple[float, float]] = []
    for i, fit in enumerate(fits):
        cands = peak_centers(fit)
        if not cands:
            continue
        if stationary:
            moving = [
                (c, a) for c, a in cands if abs(c - mode_center) >= stationary_tol_hz
            ]
            if moving:
                cands = moving
            elif len(cands) > 1 or len(cluster_positions) < len(fits):
                # only the parasitic line detected here: skip the point
                continue
        out.append((positions[i], max(cands, key=lambda ca: ca[1])[0]))
    return out


# -- decays ------------------------------------------------------------------


def fit_decay(record: RunRecord, model: str) -> FitResult:
    """Fit a Ramsey or Hahn-echo record.

    Ramsey: P = B + (V/2)[1 + cos(2 pi df t) exp(-(t/T2)^2)], Gaussian
    envelope fixed. Hahn: P = B + (V/2)[1 + exp(-(t/T2)^q)], q free. Returns
    t2, frequency/exponent, visibility, baseline.
    """
    if model not in ("ramsey", "hahn"):
        raise ValueError(f"unknown decay model {model!r}")
    t = np.asarray(record.sweep_values)
    if len(t) < 8:
        raise CalibrationError("decay fit needs at least 8 points")
    p = record.p_blockade
    sigma = _shot_sigma(p, record.shots)
    t_scale = float(np.max(t)) if np.max(t) > 0 else 1.0

    vis0 = float(np.clip((np.max(p) - np.min(p)), 0.05, 1.0))
    base0 = float(np.clip(np.min(p), 0.0, 1.0))
    t2_0 = t_scale / 3.0

    if model == "ramsey":
        # seed the oscillation frequency from the dominant FFT bin
        detr = p - np.mean(p)
        freqs = np.fft.rfftfreq(len(t), d=float(np.mean(np.diff(t))))
        amp = np.abs(np.fft.rfft(detr))
        f0 = float(freqs[np.argmax(amp[1:]) + 1]) if len(amp) > 1 else 0.0
        meta_f0 = float(record.meta.get("detuning", f0))
        names = ["t2", "frequency", "visibility", "baseline"]
        x0 = [t2_0, meta_f0 if meta_f0 > 0 else f0, vis0, base0]
        lo = [t[1] * 0.1 if t[1] > 0 else 1e-9, 0.0, 0.01, 0.0]
        hi = [t_scale * 100, 0.5 / max(float(np.min(np.diff(t))), 1e-12), 1.0, 1.0]

        def model_p(x):
            return ramsey_probability(t, x[1], x[0], x[2], x[3])

    else:
        names = ["t2", "exponent", "visibility", "baseline"]
        x0 = [t2_0, 1.5, vis0, base0]
        lo = [t[1] * 0.1 if t[1] > 0 else 1e-9, 0.5, 0.01, 0.0]
        hi = [t_scale * 100, 4.0, 1.0, 1.0]

        def model_p(x):
            return hahn_probability(t, x[0], x[2], x[3], exponent=x[1])

    def resid(x):
        return (model_p(x) - p) / sigma

    result = _solve(resid, x0, (lo, hi), names, model, len(t),
                    meta={"t_max": t_scale, "shots": record.shots})
    if model == "ramsey" and result.converged:
        params = dict(result.params)
        errors = dict(result.errors)
        params["exponent"] = 2.0
        errors["exponent"] = 0.0
        result = FitResult(result.model, params, errors, result.residual_rms,
                           result.converged, meta=result.meta)
    # a fitted T2 pinned at the upper bound means the trace never decayed
    if result.converged and result.params["t2"] >= 0.99 * t_scale * 100:
        meta = dict(result.meta)
        meta["t2_unbounded"] = True
        result = FitResult(result.model, result.params, result.errors,
                           result.residual_rms, converged=False, meta=meta)
    return result


def fit_oscillation(record: RunRecord) -> FitResult:
    """Rabi-trace fit: P = B + V sin^2(pi f t); returns frequency, visibility, baseline."""
    t = np.asarray(record.sweep_values)
    p = record.p_blockade
    sigma = _shot_sigma(p, record.shots)
    detr = p - np.mean(p)
    freqs = np.fft.rfftfreq(len(t), d=float(np.mean(np.diff(t))))
    amp = np.abs(np.fft.rfft(detr))
    # sin^2(pi f t) = (1 - cos(2 pi f t))/2, so the FFT peak sits at f itself
    f0 = float(freqs[np.argmax(amp[1:]) + 1]) if len(amp) > 1 else 1.0
    if f0 <= 0:
        f0 = 0.25 / float(np.mean(np.diff(t)))
    names = ["frequency", "visibility", "baseline"]
    x0 = [f0, float(np.clip(np.max(p) - np.min(p), 0.05, 1.0)), float(np.min(p))]
    lo = [0.0, 0.01, 0.0]
    hi = [2.0 / max(float(np.min(np.diff(t))), 1e-12), 1.0, 1.0]

    def resid(x):
        return (x[2] + x[1] * np.sin(np.pi * x[0] * t) ** 2 - p) / sigma

    return _solve(resid, x0, (lo, hi), names, "rabi", len(t))


def fit_exponential(lengths, values, sigma=None, baseline=None) -> FitResult:
    """Fit y = A alpha^N + B for survival-vs-length data; returns alpha, a, b.

    A shallow decay (max N far below the 1/e length) cannot pin B and alpha
    simultaneously; passing baseline fixes B at an independently calibrated
    asymptote and fits only A and alpha.
    """
    n = np.asarray(lengths, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(np.unique(n)) < 4:
        raise CalibrationError("exponential fit needs >= 4 distinct lengths")
    w = np.ones_like(y) if sigma is None else np.asarray(sigma, dtype=float)
    alpha0 = 0.99
    if baseline is not None:
        b_fix = float(baseline)
        a0 = float(np.max(y) - b_fix)
        names = ["alpha", "a"]

        def resid(x):
            return (x[1] * np.power(x[0], n) + b_fix - y) / w

        out = _solve(
            resid,
            # alpha may exceed 1 so downstream callers can flag rising data
            [alpha0, max(a0, 1e-3)],
            ([1e-6, 1e-6], [1.5, 2.0]),
            names,
            "exponential",
            len(n),
        )
        out.params["b"] = b_fix
        out.errors["b"] = 0.0
        out.meta["baseline_fixed"] = True
        return out
    b0 = float(np.min(y))
    a0 = float(np.max(y) - b0)
    names = ["alpha", "a", "b"]

    def resid(x):
        return (x[1] * np.power(x[0], n) + x[2] - y) / w

    return _solve(
        resid,
        [alpha0, max(a0, 1e-3), b0],
        ([1e-6, 1e-6, -1.0], [1.5, 2.0, 2.0]),
        names,
        "exponential",
        len(n),
    )
