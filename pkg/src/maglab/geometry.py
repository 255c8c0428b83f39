"""Small rotation / vector helpers used by the field and spin models.

All rotations are proper 3x3 matrices mapping column vectors; angles are in
degrees at the API surface because every angle in this package (misalignment,
magnet pitch, out-of-plane angle) is quoted in degrees.
"""

from __future__ import annotations

import numpy as np


def unit(v) -> np.ndarray:
    """Normalize a 3-vector; raises on (near-)zero input."""
    a = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(a))
    if n < 1e-300:
        raise ValueError("cannot normalize a zero vector")
    return a / n


def rotation_about_x(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_about_y(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_about_z(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_axis_angle(axis, angle_deg: float) -> np.ndarray:
    """Rodrigues rotation about an arbitrary axis."""
    n = unit(axis)
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    k = np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])
    return np.eye(3) * c + s * k + (1.0 - c) * np.outer(n, n)


def euler_zyz(alpha_deg: float, beta_deg: float, gamma_deg: float) -> np.ndarray:
    """Proper rotation R = Rz(alpha) @ Ry(beta) @ Rz(gamma)."""
    return rotation_about_z(alpha_deg) @ rotation_about_y(beta_deg) @ rotation_about_z(gamma_deg)


def is_rotation(r: np.ndarray, tol: float = 1e-12) -> bool:
    """True when r is orthogonal with determinant +1 within tol."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    if not np.allclose(r.T @ r, np.eye(3), atol=10 * tol, rtol=0.0):
        return False
    return abs(float(np.linalg.det(r)) - 1.0) <= 10 * tol
