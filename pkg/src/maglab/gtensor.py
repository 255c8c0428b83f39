"""Recover the g-tensor and sample misalignment from a Larmor-frequency map.

The forward model is f = (mu_B/h) |R diag(g) R^T B(position)| with the field
supplied by a calibrated magnetics model. Principal values are fitted in log
space (positivity for free) and the orientation as a rotation vector relative
to the nominal axis ordering; multi-start over orientation seeds guards
against the local minima this bilinear-ish objective grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from maglab.defaults import sample_orientation
from maglab.errors import CalibrationError
from maglab.fitting import MAX_ITER, XTOL, FitResult
from maglab.magnetics import FieldVector, StagePosition
from maglab.spinmodel import MU_B_OVER_H, GTensor


@dataclass(frozen=True)
class GTensorFit:
    gtensor: GTensor
    misalignment_deg: float
    fit: FitResult
    under_determined: bool
    seed_objectives: tuple[float, ...]

    @property
    def objective(self) -> float:
        return float(self.fit.meta["objective"])


def _rot_from_vec(w: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(w))
    if theta < 1e-15:
        return np.eye(3)
    k = w / theta
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(theta) * kx + (1 - math.cos(theta)) * (kx @ kx)


def canonicalize(g_values: Sequence[float], r: np.ndarray) -> tuple[tuple[float, float, float], np.ndarray]:
    """Fix the axis-permutation/sign gauge of a fitted tensor.

    Orders principal axes so e3 is the one nearest the lab x axis (growth
    direction) with positive projection, e2 nearest the lab z axis, and
    e1 = e2 x e3 completing a right-handed frame.
    """
    cols = [np.asarray(r[:, i], dtype=float) for i in range(3)]
    gs = [float(g) for g in g_values]
    i3 = max(range(3), key=lambda i: abs(cols[i][0]))
    rest = [i for i in range(3) if i != i3]
    i2 = max(rest, key=lambda i: abs(cols[i][2]))
    i1 = next(i for i in rest if i != i2)
    e3 = cols[i3] * (1.0 if cols[i3][0] >= 0 else -1.0)
    e2 = cols[i2] * (1.0 if cols[i2][2] >= 0 else -1.0)
    e1 = np.cross(e2, e3)
    r_new = np.column_stack([e1, e2, e3])
    return (gs[i1], gs[i2], gs[i3]), r_new


def misalignment_of(r: np.ndarray) -> float:
    """Angle in degrees between the third principal axis and the lab x axis."""
    e3 = r[:, 2]
    return math.degrees(math.acos(min(abs(float(e3[0])), 1.0)))


def _positions_rank(positions: list[StagePosition]) -> int:
    arr = np.array([[p.x, p.y, p.z] for p in positions], dtype=float)
    arr = arr - arr.mean(axis=0)
    if len(arr) < 2:
        return 0
    s = np.linalg.svd(arr, compute_uv=False)
    scale = s[0] if s[0] > 0 else 1.0
    return int(np.sum(s > 1e-6 * scale))


def informative_map_positions() -> list[StagePosition]:
    """Reference measurement design for a well-conditioned g-tensor fit.

    A wide raster pins the dominant out-of-plane response and the
    orientation; the in-plane principal values only enter where the total
    field lies nearly in the sample plane, so a dense band across the
    in-plane crossing at several y offsets (which rotates the in-plane field
    azimuth) is what separates g1 from g2. Meant for zero solenoid field.
    """
    positions = []
    for x in np.linspace(-250, 250, 5):
        for y in (-200.0, 0.0, 200.0):
            positions.append(StagePosition(float(x), float(y), -200.0))
    for y in np.linspace(-150, 150, 7):
        for x in np.linspace(-14, -2, 5):
            positions.append(StagePosition(float(x), float(y), -160.0))
    return positions


def fit_gtensor(
    frequency_map: Sequence[tuple[StagePosition, float]],
    field_model: Callable[[StagePosition], FieldVector],
    sigma_hz: float | Sequence[float] | None = None,
    n_orientation_seeds: int = 8,
) -> GTensorFit:
    """Fit principal g values and orientation to (position, f_L) data.

    Needs >= 20 points spanning at least two motion axes for the full
    6-parameter fit; single-axis maps are flagged under-determined and fall
    back to fitting principal values with the orientation pinned at the
    nominal guess.
    """
    if len(frequency_map) < 20:
        raise CalibrationError("g-tensor fit needs at least 20 map points")
    positions = [p for p, _ in frequency_map]
    f_data = np.array([f for _, f in frequency_map], dtype=float)
    if np.any(f_data <= 0):
        raise CalibrationError("map contains non-positive frequencies")
    b = np.array([field_model(p).as_array() for p in positions])
    if sigma_hz is None:
        w = np.maximum(f_data * 1e-3, 1.0)
    else:
        w = np.broadcast_to(np.asarray(sigma_hz, dtype=float), f_data.shape).copy()

    under_determined = _positions_rank(positions) < 2
    r0 = sample_orientation(0.0)
    g0 = np.array([0.2, 0.2, 5.0])

    def predict(log_g: np.ndarray, wvec: np.ndarray) -> np.ndarray:
        r = _rot_from_vec(wvec) @ r0
        gmat = r @ np.diag(np.exp(log_g)) @ r.T
        return MU_B_OVER_H * np.linalg.norm(b @ gmat.T, axis=1)

    if under_determined:
        def resid3(x):
            return (predict(x, np.zeros(3)) - f_data) / w

        res = least_squares(resid3, np.log(g0), method="trf",
                            max_nfev=MAX_ITER * 3, xtol=XTOL)
        best, best_w = res, np.zeros(3)
        seed_objs = (float(2 * res.cost),)
    else:
        rng = np.random.default_rng(1234)
        seeds = [np.zeros(3)]
        for axis in np.eye(3):
            seeds.append(0.12 * axis)
            seeds.append(-0.12 * axis)
        while len(seeds) < max(n_orientation_seeds, 8):
            seeds.append(rng.normal(scale=0.5, size=3))

        def resid6(x):
            return (predict(x[:3], x[3:]) - f_data) / w

        best = None
        objs = []
        for s in seeds:
            x0 = np.concatenate([np.log(g0), s])
            res = least_squares(resid6, x0, method="trf",
                                max_nfev=MAX_ITER * 6, xtol=XTOL)
            objs.append(float(2 * res.cost))
            if best is None or res.cost < best.cost:
                best = res
        best_w = best.x[3:]
        seed_objs = tuple(objs)

    log_g = best.x[:3]
    r_fit = _rot_from_vec(best_w) @ r0
    g_fit, r_canon = canonicalize(np.exp(log_g), r_fit)

    dof = max(len(f_data) - len(best.x), 1)
    s2 = float(2 * best.cost / dof)
    try:
        cov = np.linalg.inv(best.jac.T @ best.jac) * s2
        sig = np.sqrt(np.clip(np.diag(cov), 0, np.inf))
    except np.linalg.LinAlgError:
        sig = np.full(len(best.x), np.nan)
    # d(g)/d(log g) = g
    g_raw = np.exp(log_g)
    names = ["g1", "g2", "g3"] if under_determined else ["g1", "g2", "g3", "w1", "w2", "w3"]
    raw_params = dict(zip(names, list(g_raw) + list(best.x[3:])))
    raw_errors = dict(zip(names, list(g_raw * sig[:3]) + list(sig[3:])))
    fit = FitResult(
        model="gtensor",
        params={**raw_params, "g1_c": g_fit[0], "g2_c": g_fit[1], "g3_c": g_fit[2]},
        errors=raw_errors,
        residual_rms=float(np.sqrt(np.mean(best.fun**2))),
        converged=bool(best.success),
        meta={"objective": float(2 * best.cost), "under_determined": under_determined},
    )
    return GTensorFit(
        gtensor=GTensor(g_fit, r_canon),
        misalignment_deg=misalignment_of(r_canon),
        fit=fit,
        under_determined=under_determined,
        seed_objectives=seed_objs,
    )
