"""Dev sanity checks for the analytic cuboid field (not shipped as tests)."""

import math
import sys

import numpy as np

sys.path.insert(0, "/root/pkg/src")

from maglab.magnetics import MagnetSpec, StagePosition, cuboid_field, cuboid_field_many

MU_0 = 4e-7 * math.pi


def dipole_grid_field(spec, points_mm, n=48):
    """Brute force: magnet volume as a grid of point dipoles."""
    a, b, c = spec.half_dims
    xs = (np.arange(n) + 0.5) / n * 2 * a - a
    ys = (np.arange(n) + 0.5) / n * 2 * b - b
    zs = (np.arange(n) + 0.5) / n * 2 * c - c
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    centers = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)  # magnet frame, mm
    cell_volume_m3 = (2 * a / n) * (2 * b / n) * (2 * c / n) * 1e-9
    m_total = spec.remanence_t / MU_0 * cell_volume_m3  # A*m^2 per cell
    m_vec = m_total * np.asarray(spec.magnetization_axis)

    q = spec.to_magnet_frame(np.atleast_2d(points_mm))
    out = np.zeros((q.shape[0], 3))
    for i, p in enumerate(q):
        r = (p - centers) * 1e-3  # meters
        rn = np.linalg.norm(r, axis=1)
        rhat = r / rn[:, None]
        mdotr = rhat @ m_vec
        bvec = MU_0 / (4 * math.pi) * ((3 * mdotr[:, None] * rhat - m_vec) / rn[:, None] ** 3)
        out[i] = bvec.sum(axis=0)
    return out @ spec.orientation.T


def kj_on_axis(br, L, W, T, gap):
    z1, z2 = gap, gap + T
    t1 = math.atan(L * W / (2 * z1 * math.sqrt(4 * z1**2 + L**2 + W**2)))
    t2 = math.atan(L * W / (2 * z2 * math.sqrt(4 * z2**2 + L**2 + W**2)))
    return br / math.pi * (t1 - t2)


spec = MagnetSpec(dims=(110.6, 89.0, 19.5), remanence_t=1.35, position=StagePosition(0, 0, 0))

# 1. on-axis closed form (gap measured from the pole face, magnet below origin)
for gap in (160.0, 200.0, 400.0):
    b = cuboid_field(spec.at_position(StagePosition(0, 0, -gap)), StagePosition(0, 0, 0))
    ref = kj_on_axis(1.35, 110.6, 89.0, 19.5, gap)
    print(f"gap {gap:6.1f} mm: Bz analytic {b.bz*1e3:10.6f} mT  on-axis ref {ref*1e3:10.6f} mT  bx,by {b.bx:.2e},{b.by:.2e}")

# 2. dipole-grid oracle at random exterior points
rng = np.random.default_rng(7)
pts = []
while len(pts) < 30:
    p = rng.uniform(-400, 400, size=3)
    r = np.linalg.norm(p - np.array([0, 0, -spec.dims[2] / 2]))
    if r > 150:
        pts.append(p)
pts = np.array(pts)
analytic = cuboid_field_many(spec, pts)
oracle = dipole_grid_field(spec, pts, n=48)
rel = np.linalg.norm(analytic - oracle, axis=1) / np.linalg.norm(oracle, axis=1)
print(f"dipole-grid oracle: max rel err {rel.max():.2e}, median {np.median(rel):.2e}")

# 3. far-field dipole scaling: |B| * r^3 constant along a diagonal ray
ray = np.array([0.3, 0.2, 1.0])
ray /= np.linalg.norm(ray)
rs = np.geomspace(1200, 12000, 8)
vals = []
for r in rs:
    p = np.array([0, 0, -spec.dims[2] / 2]) + ray * r
    b = cuboid_field_many(spec, p[None, :])[0]
    vals.append(np.linalg.norm(b) * r**3)
vals = np.array(vals)
print(f"far field |B|r^3 spread: {(vals.max() - vals.min()) / vals.mean():.2e}")

# 4. mirror symmetries (magnet at origin, M along z)
p = np.array([[73.0, 41.0, 160.0]])
bp = cuboid_field_many(spec, p)[0]
bx_m = cuboid_field_many(spec, p * np.array([-1, 1, 1]))[0]
by_m = cuboid_field_many(spec, p * np.array([1, -1, 1]))[0]
print("x-mirror:", bp, bx_m, "expect (-bx, by, bz)")
print("y-mirror:", bp, by_m, "expect (bx, -by, bz)")

# z-mirror about the BODY centre (anchor is the top face, so reflect through z = -T/2)
pz = np.array([[73.0, 41.0, 160.0 - spec.dims[2] / 2]])
pz_m = np.array([[73.0, 41.0, -(160.0 - spec.dims[2] / 2) - spec.dims[2]]])
bz_p = cuboid_field_many(spec, pz)[0]
bz_m = cuboid_field_many(spec, pz_m)[0]
print("z-mirror:", bz_p, bz_m, "expect (-bx, -by, bz)")

# 5. tilted magnetization axis vs oracle
spec_x = MagnetSpec(dims=(110.6, 89.0, 19.5), remanence_t=1.35, magnetization_axis=(1, 0, 0))
spec_tilt = MagnetSpec(dims=(110.6, 89.0, 19.5), remanence_t=1.35,
                       magnetization_axis=tuple(np.array([0.3, -0.2, 0.93]) / np.linalg.norm([0.3, -0.2, 0.93])))
for name, s in (("M||x", spec_x), ("tilted M", spec_tilt)):
    analytic = cuboid_field_many(s, pts)
    oracle = dipole_grid_field(s, pts, n=48)
    rel = np.linalg.norm(analytic - oracle, axis=1) / np.linalg.norm(oracle, axis=1)
    print(f"{name}: max rel err vs oracle {rel.max():.2e}")
