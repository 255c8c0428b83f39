"""Qubit observables from the local magnetic field.

The Larmor frequency comes from an anisotropic g-tensor, f_L = (mu_B/h) |G B|.
Dephasing follows a two-amplitude quasi-static hyperfine model resolved along
the out-of-plane angle theta of the total field: the out-of-plane fluctuation
amplitude is orders of magnitude larger than the in-plane one, which is what
creates the in-plane coherence sweet spot. Drive efficiency and readout
visibility are phenomenological angle profiles with the trends of the device.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from maglab.geometry import is_rotation, unit
from maglab.magnetics import FieldVector

#: Bohr magneton over Planck constant, Hz per tesla
MU_B_OVER_H = 13.996e9


@dataclass(frozen=True, eq=False)
class GTensor:
    """Principal g values and the rotation from the principal frame to the lab.

    Principal axes are the columns of ``orientation``; the third axis is the
    near-growth-direction (out-of-plane) one by convention. The orientation
    carries the sample misalignment, so a field along the lab z axis is a few
    degrees out of plane.
    """

    principal_values: tuple[float, float, float]
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self) -> None:
        if len(self.principal_values) != 3 or any(
            g <= 0 or not math.isfinite(g) for g in self.principal_values
        ):
            raise ValueError("principal g values must be positive and finite")
        r = np.asarray(self.orientation, dtype=float)
        if not is_rotation(r, tol=1e-9):
            raise ValueError("orientation must be a proper rotation (det +1)")
        object.__setattr__(self, "orientation", r)
        object.__setattr__(
            self, "principal_values", tuple(float(g) for g in self.principal_values)
        )

    @property
    def matrix(self) -> np.ndarray:
        """Symmetric lab-frame tensor R diag(g1,g2,g3) R^T."""
        r = self.orientation
        return r @ np.diag(self.principal_values) @ r.T

    @property
    def out_of_plane_axis(self) -> np.ndarray:
        """Lab direction of the third principal axis (growth direction)."""
        return self.orientation[:, 2].copy()

    def rotated(self, rotation: np.ndarray) -> "GTensor":
        return replace(self, orientation=np.asarray(rotation, dtype=float) @ self.orientation)


@dataclass(frozen=True, eq=False)
class QubitModel:
    """Everything the virtual experiments need to know about one qubit.

    sigma_par / sigma_perp are RMS Larmor fluctuation amplitudes (Hz) for a
    field exactly in-plane / exactly out-of-plane. echo_gain_anchors maps
    |theta| in degrees to the echo gain T2H/T2* by linear interpolation
    (clamped outside); set echo_gain_anchors to None for a constant gain.
    """

    name: str
    g: GTensor
    sigma_par: float
    sigma_perp: float
    echo_gain: float = 6.62
    echo_gain_anchors: tuple[tuple[float, float], ...] | None = None
    eta0: float = 0.02
    eta_width_deg: float = 8.0
    vis0: float = 0.9
    vis_slope: float = 0.35
    baseline: float = 0.15
    plane_normal: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if not (self.sigma_perp > self.sigma_par > 0):
            raise ValueError("expect sigma_perp > sigma_par > 0")
        if self.eta0 <= 0 or self.eta_width_deg <= 0:
            raise ValueError("drive-efficiency parameters must be positive")
        if not (0 < self.vis0 <= 1):
            raise ValueError("vis0 must be in (0, 1]")
        if not (0 <= self.baseline < 1):
            raise ValueError("baseline must be in [0, 1)")
        if self.plane_normal is None:
            object.__setattr__(self, "plane_normal", tuple(self.g.out_of_plane_axis))
        else:
            object.__setattr__(self, "plane_normal", tuple(unit(self.plane_normal)))
        if self.echo_gain_anchors is not None:
            anchors = tuple(sorted((float(a), float(gn)) for a, gn in self.echo_gain_anchors))
            if len(anchors) < 2:
                raise ValueError("echo_gain_anchors needs at least two (angle, gain) pairs")
            object.__setattr__(self, "echo_gain_anchors", anchors)

    def echo_gain_at(self, theta_deg: float) -> float:
        if self.echo_gain_anchors is None:
            return self.echo_gain
        angles = [a for a, _ in self.echo_gain_anchors]
        gains = [g for _, g in self.echo_gain_anchors]
        return float(np.interp(abs(theta_deg), angles, gains))


def larmor_frequency(g: GTensor, b: FieldVector) -> float:
    """Larmor frequency in Hz: (mu_B/h) |G B|. Zero iff B = 0."""
    gb = g.matrix @ b.as_array()
    return MU_B_OVER_H * float(np.linalg.norm(gb))


def larmor_frequency_many(g: GTensor, b_fields: np.ndarray) -> np.ndarray:
    """Vectorized larmor_frequency over (N,3) tesla rows."""
    gb = np.atleast_2d(np.asarray(b_fields, dtype=float)) @ g.matrix.T
    return MU_B_OVER_H * np.linalg.norm(gb, axis=1)


def out_of_plane_angle(b: FieldVector, plane_normal) -> float:
    """Angle of the field out of the sample plane, in degrees, in [-90, 90].

    Defined as arcsin of the normalized projection onto the plane normal
    (growth direction); 0 means the field lies in the plane.
    """
    bv = b.as_array()
    mag = float(np.linalg.norm(bv))
    if mag == 0.0:
        raise ValueError("out-of-plane angle undefined for zero field")
    n = unit(plane_normal)
    s = float(np.clip(bv @ n / mag, -1.0, 1.0))
    return math.degrees(math.asin(s))


def dephasing_sigma(model: QubitModel, theta_deg: float) -> float:
    """RMS Larmor fluctuation (Hz) at out-of-plane angle theta."""
    t = math.radians(theta_deg)
    s2 = model.sigma_par**2 * math.cos(t) ** 2 + model.sigma_perp**2 * math.sin(t) ** 2
    return math.sqrt(s2)


def coherence_times(model: QubitModel, theta_deg: float) -> tuple[float, float]:
    """(T2*, T2H) in seconds at out-of-plane angle theta (degrees).

    Gaussian free induction decay of quasi-static noise gives
    T2* = sqrt(2)/(2 pi sigma); the echo time is a gain factor on top.
    """
    sigma = dephasing_sigma(model, theta_deg)
    t2_star = math.sqrt(2.0) / (2.0 * math.pi * sigma)
    return t2_star, model.echo_gain_at(theta_deg) * t2_star


def drive_efficiency(model: QubitModel, theta_deg: float) -> float:
    """Gaussian angular profile of the EDSR drive efficiency (per volt)."""
    return model.eta0 * math.exp(-(theta_deg**2) / (2.0 * model.eta_width_deg**2))


def rabi_frequency(model: QubitModel, f_larmor: float, amplitude: float, theta_deg: float) -> float:
    """f_Rabi = eta(theta) * f_L * A for drive amplitude A (volts at the qubit)."""
    if amplitude < 0:
        raise ValueError("drive amplitude must be non-negative")
    return drive_efficiency(model, theta_deg) * f_larmor * amplitude


def readout_visibility(model: QubitModel, theta_deg: float) -> tuple[float, float]:
    """(visibility, baseline) of the blockade readout at angle theta.

    Visibility degrades toward in-plane fields (triplet leakage during
    initialization), so A_vis(0) < A_vis(90).
    """
    a_vis = model.vis0 - model.vis_slope * (90.0 - abs(theta_deg)) / 90.0
    return float(np.clip(a_vis, 0.05, 1.0)), model.baseline
