"""Walk the full tuning workflow on the simulated bench.

Moves the magnet in from its parked position, finds the qubit resonance,
hunts down the coherence sweet spot along x, and compares Ramsey and Hahn
echo times at the spot against a deliberately detuned position. Takes a
few seconds; prints everything, writes nothing.

    python3 demos/tune_and_measure.py
"""

import numpy as np

from maglab.fitting import fit_decay
from maglab.magnetics import StagePosition
from maglab.measure import measure_larmor
from maglab.sweetspot import find_sweet_spot
from maglab.virtlab import run_hahn_echo, run_ramsey
from maglab.world import World


def coherence_at(world, label):
    ram = run_ramsey(world, np.linspace(0.0, 40e-6, 60), detuning=0.2e6, shots=300)
    rfit = fit_decay(ram, model="ramsey")
    hahn = run_hahn_echo(world, np.linspace(0.0, 300e-6, 50), shots=300)
    hfit = fit_decay(hahn, model="hahn")
    t2s = rfit.param("t2") * 1e6 if rfit.converged else float("nan")
    t2h = hfit.param("t2") * 1e6 if hfit.converged else float("nan")
    print(f"  {label}: T2* = {t2s:6.2f} us   T2H = {t2h:6.2f} us")
    return t2s, t2h


def main():
    world = World.default(master_seed=2024)
    world.set_solenoid(0.025)
    print(f"qubit {world.qubit.name}, internal field 25 mT, magnet parked")

    world.move_to(StagePosition(-72.5, 0.0, -200.0), compensated=True)
    m = measure_larmor(world, f_hint=None, shots=300)
    print(f"first look at x = -72.5 mm: f_L = {m.f_center / 1e6:.2f} MHz, "
          f"field {world.angle_truth():+.2f} deg out of plane")

    res = find_sweet_spot(world, search_range=(-95.0, -50.0), budget=60)
    print(f"sweet spot: x* = {res.x_star:.2f} mm after {len(res.probes)} probes, "
          f"f_L(min) = {res.f_l_min / 1e6:.2f} MHz, "
          f"residual angle {res.residual_angle_deg:+.3f} deg")

    base = world.stage.commanded
    world.move_to(base.replace(x=res.x_star), compensated=True)
    print("coherence on vs off the spot:")
    coherence_at(world, f"x = {res.x_star:7.2f} mm (sweet spot)")
    world.move_to(base.replace(x=res.x_star - 15.0), compensated=True)
    coherence_at(world, f"x = {res.x_star - 15.0:7.2f} mm (detuned)  ")


if __name__ == "__main__":
    main()
