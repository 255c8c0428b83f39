import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maglab.geometry import (
    euler_zyz,
    is_rotation,
    rotation_about_x,
    rotation_about_y,
    rotation_about_z,
    rotation_from_axis_angle,
    unit,
)

angles = st.floats(min_value=-720.0, max_value=720.0, allow_nan=False)
components = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def test_unit_normalizes():
    v = unit([3.0, 4.0, 0.0])
    assert np.allclose(v, [0.6, 0.8, 0.0])


def test_unit_rejects_zero():
    with pytest.raises(ValueError):
        unit([0.0, 0.0, 0.0])


@pytest.mark.parametrize("make,axis", [
    (rotation_about_x, [1, 0, 0]),
    (rotation_about_y, [0, 1, 0]),
    (rotation_about_z, [0, 0, 1]),
])
@given(angle=angles)
def test_elementary_rotations_fix_their_axis(make, axis, angle):
    r = make(angle)
    assert is_rotation(r, tol=1e-12)
    assert np.allclose(r @ np.asarray(axis, dtype=float), axis, atol=1e-12)


@given(angle=angles)
def test_rotation_angle_recovered_from_trace(angle):
    r = rotation_about_y(angle)
    cos_t = (np.trace(r) - 1.0) / 2.0
    assert np.isclose(cos_t, np.cos(np.deg2rad(angle)), atol=1e-12)


@given(ax=components, ay=components, az=components, angle=angles)
def test_axis_angle_is_proper_rotation(ax, ay, az, angle):
    v = np.array([ax, ay, az])
    if np.linalg.norm(v) < 1e-6:
        v = np.array([1.0, 0.0, 0.0])
    r = rotation_from_axis_angle(v, angle)
    assert is_rotation(r, tol=1e-10)
    # the axis itself is invariant
    assert np.allclose(r @ unit(v), unit(v), atol=1e-9)
    # inverse rotation is the transpose
    assert np.allclose(rotation_from_axis_angle(v, -angle), r.T, atol=1e-12)


@pytest.mark.parametrize("make,axis", [
    (rotation_about_x, (1.0, 0.0, 0.0)),
    (rotation_about_y, (0.0, 1.0, 0.0)),
    (rotation_about_z, (0.0, 0.0, 1.0)),
])
def test_axis_angle_matches_elementary(make, axis):
    for angle in (-170.0, -30.0, 5.7, 90.0):
        assert np.allclose(rotation_from_axis_angle(axis, angle), make(angle), atol=1e-12)


def test_euler_zyz_composition():
    a, b, g = 31.0, -17.0, 112.0
    expected = rotation_about_z(a) @ rotation_about_y(b) @ rotation_about_z(g)
    assert np.allclose(euler_zyz(a, b, g), expected, atol=1e-14)
    assert is_rotation(euler_zyz(a, b, g))


def test_is_rotation_rejects_improper():
    reflect = np.diag([1.0, 1.0, -1.0])
    assert not is_rotation(reflect)
    assert not is_rotation(2.0 * np.eye(3))
    assert not is_rotation(np.eye(2))
