"""Dev-only: solve for the default world parameters and print them.

Unknowns: calibrated remanence Br (field anchor at the reference gap),
in-plane g2 (Larmor minimum target at the 25 mT operating point), out-of-plane
g3 and magnet pitch beta (Larmor map maximum at 25 mT and the zero-field
Larmor start value). After solving, sweep every scripted landscape and verify
its qualitative structure and quantitative spans. The solved numbers get
frozen as literals in maglab.defaults; this script is not shipped logic.

Run: python3 tools/dev_check_field.py && python3 tools/dev_tune_defaults.py
"""

from __future__ import annotations

import math

import numpy as np

from maglab.geometry import rotation_about_y
from maglab.magnetics import (
    MagnetSpec,
    SolenoidSpec,
    StagePosition,
    cuboid_field_many,
)
from maglab.spinmodel import (
    MU_B_OVER_H,
    GTensor,
    QubitModel,
    coherence_times,
    larmor_frequency_many,
    out_of_plane_angle,
)
from maglab.magnetics import FieldVector

DIMS = (110.6, 89.0, 19.5)
MISALIGN_DEG = 2.5
# principal axes (e1, e2, e3) -> lab (y, z, x): in-plane, in-plane-solenoid, growth
AXIS_C = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
ANCHOR_GAP_MM = 160.0
ANCHOR_B_T = 6.2e-3

# targets
F_MIN_25MT = 50.0e6      # Larmor at the in-plane crossing, z=-200, 25 mT
F_MAX_FIG3 = 150.0e6     # max over the xz map, 25 mT
F_ZERO_X0 = 40.0e6       # zero internal field, magnet home at z=-160
G1 = 0.16                # in-plane (y) principal value: not pinned by targets


def magnet_at(pitch_deg: float, br: float, pos: StagePosition) -> MagnetSpec:
    return MagnetSpec(
        dims=DIMS,
        remanence_t=br,
        position=pos,
        orientation=rotation_about_y(pitch_deg),
    )


def field_at_origin(pitch: float, br: float, x: float, z: float, b_in: float) -> np.ndarray:
    spec = magnet_at(pitch, br, StagePosition(x, 0.0, z))
    b = cuboid_field_many(spec, np.zeros((1, 3)))[0]
    return b + np.array([0.0, 0.0, b_in])


def field_grid(pitch: float, br: float, xs, z: float, b_in: float) -> np.ndarray:
    out = np.empty((len(xs), 3))
    for i, x in enumerate(xs):
        out[i] = field_at_origin(pitch, br, x, z, b_in)
    return out


def solve() -> dict:
    plane_n = rotation_about_y(MISALIGN_DEG) @ np.array([1.0, 0.0, 0.0])

    def theta_of(b3: np.ndarray) -> float:
        return math.degrees(math.asin(float(np.clip(b3 @ plane_n / np.linalg.norm(b3), -1, 1))))

    br, g2, g3, pitch = 1.16, 0.127, 6.9, 1.5
    for _ in range(60):
        # anchor: |B| at the home position with no internal field
        b_home = field_at_origin(pitch, br, 0.0, ANCHOR_GAP_MM * -1.0, 0.0)
        br *= ANCHOR_B_T / float(np.linalg.norm(b_home))

        # in-plane crossing at z=-200, 25 mT: bisect theta(x)=0
        lo, hi = -120.0, 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if theta_of(field_at_origin(pitch, br, mid, -200.0, 25e-3)) > 0:
                lo = mid
            else:
                hi = mid
        x_cross = 0.5 * (lo + hi)
        b_cross = field_at_origin(pitch, br, x_cross, -200.0, 25e-3)
        g2_new = F_MIN_25MT / (MU_B_OVER_H * float(np.linalg.norm(b_cross)))

        gt = GTensor((G1, g2_new, g3), rotation_about_y(MISALIGN_DEG) @ AXIS_C)

        # map max over the 25 mT xz window
        xs = np.linspace(-250, 0, 126)
        best = 0.0
        for z in np.linspace(-250, -160, 46):
            bf = field_grid(pitch, br, xs, z, 25e-3)
            best = max(best, float(larmor_frequency_many(gt, bf).max()))
        g3_new = g3 * F_MAX_FIG3 / best

        # zero-field start value fixes the pitch: f(0,-160, B_in=0) = 40 MHz
        gt2 = GTensor((G1, g2_new, g3_new), rotation_about_y(MISALIGN_DEG) @ AXIS_C)
        b0 = field_at_origin(pitch, br, 0.0, -160.0, 0.0)
        f0 = larmor_frequency_many(gt2, b0[None, :])[0]
        # d f0 / d pitch ~ (df/dtheta)*(1/2) with f ~ g3*sin(theta+)...; secant step
        b0p = field_at_origin(pitch + 0.05, br, 0.0, -160.0, 0.0)
        f0p = larmor_frequency_many(gt2, b0p[None, :])[0]
        dfdp = (f0p - f0) / 0.05
        pitch_new = pitch + np.clip((F_ZERO_X0 - f0) / dfdp, -0.5, 0.5)

        shift = max(abs(g2_new - g2) / g2, abs(g3_new - g3) / g3, abs(pitch_new - pitch))
        g2, g3, pitch = float(g2_new), float(g3_new), float(pitch_new)
        if shift < 1e-10:
            break

    return {"br": br, "g2": g2, "g3": g3, "pitch": pitch, "x_cross": x_cross}


def main() -> None:
    p = solve()
    br, g2, g3, pitch = p["br"], p["g2"], p["g3"], p["pitch"]
    print(f"solved: Br={br:.6f} T  g2={g2:.6f}  g3={g3:.6f}  pitch={pitch:.6f} deg")
    print(f"        25 mT in-plane crossing at z=-200: x={p['x_cross']:.2f} mm")

    gt = GTensor((G1, g2, g3), rotation_about_y(MISALIGN_DEG) @ AXIS_C)
    sigma_par = math.sqrt(2.0) / (2 * math.pi * 13.41e-6)
    sig25 = math.sqrt(2.0) / (2 * math.pi * 1.70e-6)
    c, s = math.cos(math.radians(2.5)), math.sin(math.radians(2.5))
    sigma_perp = math.sqrt((sig25**2 - sigma_par**2 * c**2) / s**2)
    model = QubitModel(
        name="Q8", g=gt, sigma_par=sigma_par, sigma_perp=sigma_perp,
        echo_gain_anchors=((0.0, 88.77 / 13.41), (2.5, 4.23 / 1.70)),
    )
    plane_n = np.asarray(model.plane_normal)
    print(f"        sigma_par={sigma_par:.1f} Hz  sigma_perp={sigma_perp:.1f} Hz")

    def theta_of(b3):
        return out_of_plane_angle(FieldVector(*b3), plane_n)

    # ---- fig2: binary search maps at z=-200
    for b_in, label in ((5e-3, "5mT"), (50e-3, "50mT")):
        xs = np.linspace(-250, 0, 251)
        bf = field_grid(pitch, br, xs, -200.0, b_in)
        f = larmor_frequency_many(gt, bf)
        i_min = int(np.argmin(f))
        interior_max = [
            i for i in range(1, len(f) - 1) if f[i] > f[i - 1] and f[i] > f[i + 1]
        ]
        print(
            f"fig2 {label}: f[x=0]={f[-1]/1e6:.1f} MHz  min {f[i_min]/1e6:.1f} MHz at "
            f"x={xs[i_min]:.0f} mm (interior={0 < i_min < len(f)-1})  "
            f"local maxima at {[f'{xs[i]:.0f}' for i in interior_max]} "
            f"({[f'{f[i]/1e6:.0f}MHz' for i in interior_max]})  span=[{f.min()/1e6:.1f},{f.max()/1e6:.1f}]"
        )

    # ---- fig3 xz map at 25 mT
    xs = np.linspace(-250, 0, 126)
    zs = np.linspace(-250, -160, 46)
    fmap = np.empty((len(zs), len(xs)))
    for j, z in enumerate(zs):
        fmap[j] = larmor_frequency_many(gt, field_grid(pitch, br, xs, z, 25e-3))
    jmax, imax = np.unravel_index(np.argmax(fmap), fmap.shape)
    print(
        f"fig3 xz: span=[{fmap.min()/1e6:.1f},{fmap.max()/1e6:.1f}] MHz  "
        f"max at x={xs[imax]:.0f}, z={zs[jmax]:.0f}  f(0,-160)={fmap[0 if zs[0]==-160 else -1, -1]/1e6:.1f}"
    )

    # ---- fig5a: z sweep at zero internal field
    zs5 = np.linspace(-260, -160, 101)
    f5a = np.array(
        [larmor_frequency_many(gt, field_at_origin(pitch, br, 0, z, 0)[None, :])[0] for z in zs5]
    )
    print(f"fig5a z-sweep: f(-160)={f5a[-1]/1e6:.2f} MHz  f(-260)={f5a[0]/1e6:.2f} MHz  monotone={bool(np.all(np.diff(f5a) > 0))}")

    # ---- fig5b: x sweep at zero internal field, z=-160
    for xlo in (-15.0, -20.0, -25.0):
        xs5 = np.linspace(xlo, 0, 101)
        bf = field_grid(pitch, br, xs5, -160.0, 0.0)
        f5b = larmor_frequency_many(gt, bf)
        i_min = int(np.argmin(f5b))
        print(
            f"fig5b x-sweep [{xlo},0]: start {f5b[-1]/1e6:.2f} MHz, min {f5b[i_min]/1e6:.2f} MHz "
            f"at x={xs5[i_min]:.2f} (interior={0 < i_min < 100}), end {f5b[0]/1e6:.2f} MHz, "
            f"span=[{f5b.min()/1e6:.1f},{f5b.max()/1e6:.1f}]"
        )

    # ---- fig4 neighbourhood: theta and coherence along x at z=-200, 25 mT
    xs4 = np.linspace(p["x_cross"] - 25, p["x_cross"] + 25, 201)
    bf4 = field_grid(pitch, br, xs4, -200.0, 25e-3)
    f4 = larmor_frequency_many(gt, bf4)
    th4 = np.array([theta_of(b) for b in bf4])
    t2s = np.array([coherence_times(model, th)[0] for th in th4])
    i_fmin, i_tmax = int(np.argmin(f4)), int(np.argmax(t2s))
    i_zero = int(np.argmin(np.abs(th4)))
    print(
        f"fig4: theta=0 at x={xs4[i_zero]:.2f}; f_L min at x={xs4[i_fmin]:.2f} "
        f"({f4[i_fmin]/1e6:.2f} MHz); T2* max at x={xs4[i_tmax]:.2f} ({t2s[i_tmax]*1e6:.2f} us); "
        f"|x_fmin - x_t2max|={abs(xs4[i_fmin]-xs4[i_tmax]):.2f} mm; "
        f"T2* at f-min x: {t2s[i_fmin]*1e6:.2f} us (ratio {t2s[i_fmin]/t2s[i_tmax]:.4f}); "
        f"dtheta/dx={np.gradient(th4, xs4)[i_zero]:.4f} deg/mm"
    )

    # ---- no-magnet configuration
    b_nm = field_at_origin(pitch, br, 0.0, -700.0, 25e-3)
    th_nm = theta_of(b_nm)
    t2s_nm, t2h_nm = coherence_times(model, th_nm)
    print(
        f"no-magnet (z=-700, 25 mT): theta={th_nm:.3f} deg  "
        f"T2*={t2s_nm*1e6:.3f} us (target 1.70)  T2H={t2h_nm*1e6:.3f} us (target 4.23)"
    )
    # sweet-spot coherence sanity
    th_ss = th4[i_tmax]
    t2s_ss, t2h_ss = coherence_times(model, th_ss)
    print(f"sweet spot: theta={th_ss:.4f} deg  T2*={t2s_ss*1e6:.2f} us  T2H={t2h_ss*1e6:.2f} us")

    # ---- supp2 circle: r=5 mm circle at z=-200, 25 mT
    angs = np.linspace(0, 360, 73)
    pts = [(5 * math.cos(math.radians(a)), 5 * math.sin(math.radians(a))) for a in angs]
    fc = np.array(
        [
            larmor_frequency_many(
                gt,
                (
                    cuboid_field_many(
                        magnet_at(pitch, br, StagePosition(cx, cy, -200.0)), np.zeros((1, 3))
                    )[0]
                    + np.array([0, 0, 25e-3])
                )[None, :],
            )[0]
            for cx, cy in pts
        ]
    )
    print(f"circle r=5 @ z=-200: f in [{fc.min()/1e6:.1f},{fc.max()/1e6:.1f}] MHz, periodic={abs(fc[0]-fc[-1])<1}")


if __name__ == "__main__":
    main()
