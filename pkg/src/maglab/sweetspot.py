"""Closed-loop search for the in-plane coherence sweet spot.

The search minimizes the *fitted* Larmor frequency over one stage axis:
coarse grid first, then golden-section refinement between the bracketing
neighbors. Every probe approaches its position from the same direction with
backlash compensation, so hysteresis does not skew the bracket. The residual
out-of-plane angle reported in the result comes from the world model and is a
simulation-truth diagnostic only; the search itself never reads it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from maglab.errors import BracketingError, CalibrationError
from maglab.measure import measure_larmor
from maglab.stage import DEFAULT_OVERSHOOT_MM
from maglab.world import World

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScanResult:
    x_star: float
    f_min: float
    probes: tuple[tuple[float, float], ...]
    iterations: int


@dataclass(frozen=True)
class SweetSpotResult:
    x_star: float
    f_l_min: float
    residual_angle_deg: float
    iterations: int
    probes: tuple[tuple[float, float], ...]


def minimize_scan(
    objective: Callable[[float], float],
    lo: float,
    hi: float,
    budget: int = 60,
    coarse_n: int = 11,
    x_tol: float = 0.5,
) -> ScanResult:
    """Coarse-grid scan plus golden-section refinement of a 1D objective.

    The coarse scan must produce an interior minimum; a minimum on either
    edge means the range does not bracket one. Stops when the bracketing
    interval is below x_tol or the evaluation budget is spent.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if coarse_n < 3 or budget < coarse_n:
        raise ValueError("budget must cover at least a 3-point coarse scan")
    probes: list[tuple[float, float]] = []

    def f(x: float) -> float:
        y = objective(x)
        probes.append((x, y))
        return y

    step = (hi - lo) / (coarse_n - 1)
    xs = [lo + i * step for i in range(coarse_n)]
    ys = [f(x) for x in xs]
    k = min(range(coarse_n), key=lambda i: ys[i])
    if k == 0 or k == coarse_n - 1:
        raise BracketingError(
            f"no interior minimum in [{lo}, {hi}]: edge value is smallest"
        )
    a, b = xs[k - 1], xs[k + 1]
    x_best, y_best = xs[k], ys[k]
    iterations = 0

    # golden-section with the two interior points seeded fresh
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    yc = f(c) if len(probes) < budget else None
    yd = f(d) if len(probes) < budget else None
    while yc is not None and yd is not None and (b - a) > x_tol and len(probes) < budget:
        iterations += 1
        if yc < yd:
            b, d, yd = d, c, yc
            c = b - GOLDEN * (b - a)
            yc = f(c) if len(probes) < budget else None
        else:
            a, c, yc = c, d, yd
            d = a + GOLDEN * (b - a)
            yd = f(d) if len(probes) < budget else None
    x_best, y_best = min(probes, key=lambda p: p[1])
    return ScanResult(x_best, y_best, tuple(probes), iterations)


def find_sweet_spot(
    world: World,
    axis: str = "x",
    search_range: tuple[float, float] = (-95.0, -50.0),
    budget: int = 60,
    coarse_n: int = 11,
    x_tol: float = 0.5,
    shots: int = 300,
    pulse_duration: float = 4.0e-6,
    f_hint: float | None = None,
) -> SweetSpotResult:
    """Locate the Larmor-frequency minimum along one stage axis.

    Long probe pulses narrow the line so the shallow minimum is resolvable.
    Probes use a unidirectional compensated approach (overshoot on the low
    side, then approach upward). Raises BracketingError when the range holds
    no interior minimum and CalibrationError when too many probe fits fail.
    """
    base = world.stage.commanded
    lo, hi = sorted(search_range)
    state = {"hint": f_hint, "failures": 0, "count": 0}

    def probe(x: float) -> float:
        target = base.replace(**{axis: x})
        # same-side approach: overshoot below (clamped to the search range so
        # no commanded position ever leaves it), then move up to the target
        pre = max(x - DEFAULT_OVERSHOOT_MM, lo)
        if pre != x:
            world.move_to(target.replace(**{axis: pre}), compensated=True)
        world.move_to(target, compensated=True)
        state["count"] += 1
        hint = state["hint"]
        if hint is None:
            m = measure_larmor(world, 60.0e6, shots=shots,
                               pulse_duration=0.5e-6, window_hz=None)
            if not math.isnan(m.f_center):
                m = measure_larmor(world, m.f_center, shots=shots,
                                   pulse_duration=pulse_duration)
        else:
            m = measure_larmor(world, hint, shots=shots, pulse_duration=pulse_duration)
        if math.isnan(m.f_center):
            state["failures"] += 1
            if state["failures"] > 0.3 * max(state["count"], coarse_n):
                raise CalibrationError("more than 30% of sweet-spot probes failed to fit")
            return float("inf")
        state["hint"] = m.f_center
        return m.f_center

    scan = minimize_scan(probe, lo, hi, budget=budget, coarse_n=coarse_n, x_tol=x_tol)

    pre_final = max(scan.x_star - DEFAULT_OVERSHOOT_MM, lo)
    if pre_final != scan.x_star:
        world.move_to(base.replace(**{axis: pre_final}), compensated=True)
    world.move_to(base.replace(**{axis: scan.x_star}), compensated=True)
    residual = world.angle_truth()
    return SweetSpotResult(
        x_star=scan.x_star,
        f_l_min=scan.f_min,
        residual_angle_deg=residual,
        iterations=scan.iterations,
        probes=scan.probes,
    )
