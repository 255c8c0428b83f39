"""Magnetic field at the sample: block permanent magnet plus uniaxial solenoid.

Conventions
-----------
Lab frame: the sample sits at the origin, z is the fridge axis (solenoid
axis), x is close to the heterostructure growth direction. Positions are in
millimetres, fields in tesla.

The block magnet is anchored at the centre of its sample-facing pole face:
``MagnetSpec.position`` is the lab position of that face centre and the body
extends one thickness below it along the local -z axis. With the default
identity stage transform, a stage reading of (0, 0, -160) therefore puts the
pole face 160 mm below the sample.

The analytic cuboid field is the standard charge-sheet (equivalent surface
charge) solution for a uniformly magnetized rectangular prism, written as a
corner sum. It is exact outside the magnet and is validated against a
point-dipole-grid oracle in the test suite.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from maglab.errors import CalibrationError, FieldDomainError
from maglab.geometry import is_rotation, unit

#: vacuum permeability in T*m/A
MU_0 = 4.0e-7 * math.pi

#: maximum solenoid setpoint magnitude in tesla
SOLENOID_LIMIT_T = 3.0


@dataclass(frozen=True)
class FieldVector:
    """Magnetic field components in tesla, lab frame."""

    bx: float
    by: float
    bz: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.bx, self.by, self.bz)):
            raise ValueError("field components must be finite")

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.bx**2 + self.by**2 + self.bz**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz])

    @classmethod
    def from_array(cls, a) -> "FieldVector":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def __add__(self, other: "FieldVector") -> "FieldVector":
        return FieldVector(self.bx + other.bx, self.by + other.by, self.bz + other.bz)

    def scaled(self, c: float) -> "FieldVector":
        return FieldVector(c * self.bx, c * self.by, c * self.bz)


@dataclass(frozen=True)
class StagePosition:
    """Magnet stage coordinates in millimetres, relative to the sample at the origin."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError("stage coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "StagePosition":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def replace(self, **kw) -> "StagePosition":
        return replace(self, **kw)

    def distance_to(self, other: "StagePosition") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))


ORIGIN = StagePosition(0.0, 0.0, 0.0)


def _identity() -> np.ndarray:
    return np.eye(3)


@dataclass(frozen=True, eq=False)
class MagnetSpec:
    """Geometry, remanence, and pose of the block permanent magnet.

    dims is (length, width, thickness) in mm along the magnet-frame x, y, z
    axes; the magnetization axis defaults to the thickness axis. orientation
    rotates magnet-frame vectors into the lab frame.
    """

    dims: tuple[float, float, float]
    remanence_t: float
    magnetization_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    position: StagePosition = ORIGIN
    orientation: np.ndarray = field(default_factory=_identity)

    def __post_init__(self) -> None:
        if len(self.dims) != 3 or any(d <= 0 or not math.isfinite(d) for d in self.dims):
            raise ValueError("magnet dims must be three positive lengths in mm")
        if self.remanence_t < 0 or not math.isfinite(self.remanence_t):
            raise ValueError("remanence must be finite and non-negative")
        ax = np.asarray(self.magnetization_axis, dtype=float)
        n = float(np.linalg.norm(ax))
        if not (0.9 < n < 1.1):
            raise ValueError("magnetization_axis must be a unit vector")
        object.__setattr__(self, "magnetization_axis", tuple(ax / n))
        r = np.asarray(self.orientation, dtype=float)
        if not is_rotation(r, tol=1e-9):
            raise ValueError("orientation must be a proper rotation matrix")
        object.__setattr__(self, "orientation", r)
        object.__setattr__(self, "dims", tuple(float(d) for d in self.dims))

    @property
    def half_dims(self) -> tuple[float, float, float]:
        return (self.dims[0] / 2.0, self.dims[1] / 2.0, self.dims[2] / 2.0)

    @property
    def volume_mm3(self) -> float:
        return self.dims[0] * self.dims[1] * self.dims[2]

    def at_position(self, position: StagePosition) -> "MagnetSpec":
        return replace(self, position=position)

    def with_remanence(self, remanence_t: float) -> "MagnetSpec":
        return replace(self, remanence_t=remanence_t)

    def to_magnet_frame(self, points_mm: np.ndarray) -> np.ndarray:
        """Lab points (N,3) -> body-centred magnet-frame coordinates (N,3)."""
        p = np.atleast_2d(np.asarray(points_mm, dtype=float))
        local = (p - self.position.as_array()) @ self.orientation
        # anchor is the +z face centre; shift down half a thickness to the body centre
        local[:, 2] += self.dims[2] / 2.0
        return local

    def is_exterior(self, point: StagePosition, margin_mm: float = 0.0) -> bool:
        q = self.to_magnet_frame(point.as_array()[None, :])[0]
        a, b, c = self.half_dims
        return bool(
            (abs(q[0]) > a + margin_mm)
            or (abs(q[1]) > b + margin_mm)
            or (abs(q[2]) > c + margin_mm)
        )


@dataclass(frozen=True)
class SolenoidSpec:
    """Uniaxial solenoid, modeled as a uniform field at the sample.

    external_attenuation scales externally generated fields at the sample
    (screening by the magnet bore); 1.0 means no screening.
    """

    setpoint_t: float = 0.0
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    external_attenuation: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.setpoint_t) or abs(self.setpoint_t) > SOLENOID_LIMIT_T:
            raise ValueError(
                f"solenoid setpoint {self.setpoint_t} T outside the +/-{SOLENOID_LIMIT_T} T limit"
            )
        ax = unit(self.axis)
        object.__setattr__(self, "axis", tuple(ax))
        if not (0.0 <= self.external_attenuation <= 1.0):
            raise ValueError("external_attenuation must be in [0, 1]")

    def with_setpoint(self, setpoint_t: float) -> "SolenoidSpec":
        return replace(self, setpoint_t=setpoint_t)


# ---------------------------------------------------------------------------
# analytic cuboid field


def _corner_sum_z(q: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    """Field/Br of a unit-remanence cuboid magnetized along +z, body-centred frame.

    q is (N,3) in the same length unit as the half-dimensions (the corner sum
    is scale-free). Returns (N,3) in units of Br.
    """
    x, y, z = q[:, 0], q[:, 1], q[:, 2]
    out = np.zeros_like(q)
    for i in (0, 1):
        u = x - (-1.0) ** i * a
        for j in (0, 1):
            v = y - (-1.0) ** j * b
            for k in (0, 1):
                w = z - (-1.0) ** k * c
                sign = (-1.0) ** (i + j + k)
                r = np.sqrt(u * u + v * v + w * w)
                # atanh arguments are strictly inside (-1,1) for exterior
                # points off the edge-extension lines
                out[:, 0] -= sign * np.arctanh(np.clip(v / r, -1.0, 1.0))
                out[:, 1] -= sign * np.arctanh(np.clip(u / r, -1.0, 1.0))
                out[:, 2] += sign * np.arctan2(u * v, w * r)
    return out / (4.0 * math.pi)


_AXIS_PERMUTATIONS = {
    # magnetization along local axis -> (forward permutation, half-dim order)
    2: ((0, 1, 2), (0, 1, 2)),  # z: identity
    0: ((1, 2, 0), (1, 2, 0)),  # x: evaluate in (y, z, x) space
    1: ((2, 0, 1), (2, 0, 1)),  # y: evaluate in (z, x, y) space
}


def _unit_cuboid_field_local(q: np.ndarray, half_dims: tuple[float, float, float], m_axis: np.ndarray) -> np.ndarray:
    """Field/Br in the magnet frame for magnetization unit vector m_axis."""
    total = np.zeros_like(q)
    for axis_idx in (0, 1, 2):
        comp = float(m_axis[axis_idx])
        if comp == 0.0:
            continue
        perm, dim_order = _AXIS_PERMUTATIONS[axis_idx]
        qp = q[:, perm]
        a, b, c = (half_dims[dim_order[0]], half_dims[dim_order[1]], half_dims[dim_order[2]])
        bp = _corner_sum_z(qp, a, b, c)
        # cyclic permutations are rotations, so fields map back by the inverse
        inv = np.argsort(perm)
        total += comp * bp[:, inv]
    return total


def cuboid_field_many(spec: MagnetSpec, points_mm: np.ndarray) -> np.ndarray:
    """Analytic field of the block magnet at lab points (N,3) mm -> (N,3) tesla.

    Exact charge-sheet solution for a uniformly magnetized rectangular prism;
    valid strictly outside the magnet volume.
    """
    pts = np.atleast_2d(np.asarray(points_mm, dtype=float))
    q = spec.to_magnet_frame(pts)
    a, b, c = spec.half_dims
    inside = (np.abs(q[:, 0]) <= a) & (np.abs(q[:, 1]) <= b) & (np.abs(q[:, 2]) <= c)
    if np.any(inside):
        raise FieldDomainError(
            "field evaluation point inside or on the magnet volume"
        )
    if spec.remanence_t == 0.0:
        return np.zeros_like(q)
    m_axis = np.asarray(spec.magnetization_axis)
    b_local = spec.remanence_t * _unit_cuboid_field_local(q, spec.half_dims, m_axis)
    return b_local @ spec.orientation.T


def cuboid_field(spec: MagnetSpec, point: StagePosition) -> FieldVector:
    """Analytic field of the block magnet at one lab point."""
    return FieldVector.from_array(cuboid_field_many(spec, point.as_array()[None, :])[0])


def solenoid_field(spec: SolenoidSpec) -> FieldVector:
    """Uniform solenoid field at the sample: setpoint times axis."""
    ax = np.asarray(spec.axis)
    return FieldVector.from_array(spec.setpoint_t * ax)


def total_field(solenoid: SolenoidSpec, magnet: MagnetSpec, sample_point: StagePosition = ORIGIN) -> FieldVector:
    """Superposition of solenoid and magnet fields at the sample point."""
    b_ext = cuboid_field(magnet, sample_point)
    if solenoid.external_attenuation != 1.0:
        b_ext = b_ext.scaled(solenoid.external_attenuation)
    return solenoid_field(solenoid) + b_ext


# ---------------------------------------------------------------------------
# remanence calibration against a measured |B|(z) profile


@dataclass(frozen=True)
class RemanenceFit:
    """Result of fitting the magnet remanence to a field profile."""

    spec: MagnetSpec
    remanence_t: float
    residual_rms_t: float
    n_points: int


def profile_field_magnitudes(spec: MagnetSpec, z_positions_mm) -> np.ndarray:
    """|B| at the sample for the magnet parked on axis at each stage z."""
    z = np.asarray(z_positions_mm, dtype=float)
    mags = np.empty_like(z)
    for idx, zi in enumerate(z):
        b = cuboid_field(spec.at_position(StagePosition(0.0, 0.0, float(zi))), ORIGIN)
        mags[idx] = b.magnitude
    return mags


def calibrate_remanence(profile, template: MagnetSpec) -> RemanenceFit:
    """Fit Br so the analytic on-axis profile matches measured (z_mm, |B|) points.

    The model is linear in Br, so this is an exact least-squares solve. A
    single anchor point pins Br exactly; multiple points are fitted in the
    least-squares sense with the residual RMS reported.
    """
    rows = list(profile)
    if len(rows) < 1:
        raise CalibrationError("remanence calibration needs at least one profile point")
    z = np.array([float(r[0]) for r in rows])
    meas = np.array([float(r[1]) for r in rows])
    if len(rows) >= 2 and np.ptp(z) == 0.0:
        raise CalibrationError("degenerate profile: all points at the same z")
    if np.any(~np.isfinite(meas)) or np.any(meas < 0):
        raise CalibrationError("profile magnitudes must be finite and non-negative")
    unit_spec = template.with_remanence(1.0)
    model = profile_field_magnitudes(unit_spec, z)
    denom = float(model @ model)
    if denom == 0.0:
        raise CalibrationError("profile positions produce zero model field")
    br = float(model @ meas) / denom
    resid = meas - br * model
    rms = float(np.sqrt(np.mean(resid**2)))
    return RemanenceFit(
        spec=template.with_remanence(br),
        remanence_t=br,
        residual_rms_t=rms,
        n_points=len(rows),
    )


# ---------------------------------------------------------------------------
# field-profile CSV format: header exactly `z_mm,b_tesla`

PROFILE_HEADER = ("z_mm", "b_tesla")


def write_field_profile(path, profile) -> None:
    """Write (z_mm, |B| tesla) rows as CSV with LF endings and UTF-8."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_HEADER)
        for z_mm, b_t in profile:
            writer.writerow([repr(float(z_mm)), repr(float(b_t))])


def read_field_profile(path_or_text) -> list[tuple[float, float]]:
    """Read a field-profile CSV; accepts a path or the file content itself."""
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        fh = io.StringIO(path_or_text)
        return _parse_profile(fh)
    with open(path_or_text, "r", encoding="utf-8", newline="") as fh:
        return _parse_profile(fh)


def _parse_profile(fh) -> list[tuple[float, float]]:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != PROFILE_HEADER:
        raise CalibrationError(f"field profile header must be {','.join(PROFILE_HEADER)}")
    return [(float(row[0]), float(row[1])) for row in reader if row]
