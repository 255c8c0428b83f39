"""Three-axis gantry simulation with start-stop backlash hysteresis.

Every move that starts and stops an axis leaves a small positioning error
opposing the travel direction (50 um per event by default), which accumulates
over a sweep; `compensate` inverts the model so a corrected command lands on
target, and `plan_sweep` adds an overshoot-and-return pre-move so all points
of a sweep are approached from the same side. Moves are instantaneous; settle
time and vibration are not modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from maglab.errors import MotionError
from maglab.magnetics import StagePosition

AXES = ("x", "y", "z")

#: default positioning tolerance for compensated moves, mm
DEFAULT_POSITION_TOLERANCE_MM = 0.05

#: default overshoot distance for unidirectional approaches, mm
DEFAULT_OVERSHOOT_MM = 5.0


@dataclass(frozen=True)
class TravelLimits:
    """Inclusive per-axis travel range in mm."""

    x: tuple[float, float] = (-300.0, 300.0)
    y: tuple[float, float] = (-300.0, 300.0)
    z: tuple[float, float] = (-700.0, -50.0)

    def __post_init__(self) -> None:
        for name in AXES:
            lo, hi = getattr(self, name)
            if not (lo < hi):
                raise ValueError(f"empty travel range on {name}: {(lo, hi)}")

    def contains(self, p: StagePosition) -> bool:
        return all(
            getattr(self, name)[0] <= getattr(p, name) <= getattr(self, name)[1]
            for name in AXES
        )

    def clamp(self, p: StagePosition) -> StagePosition:
        vals = {
            name: min(max(getattr(p, name), getattr(self, name)[0]), getattr(self, name)[1])
            for name in AXES
        }
        return StagePosition(**vals)


@dataclass(frozen=True)
class StageState:
    """Snapshot of the gantry: commanded vs true position and backlash state.

    true_pos = commanded + backlash_accum holds after every move. The
    accumulator grows by eps_per_event (plus eps_per_mm * distance when
    configured) against the travel direction, per axis, per start-stop event.
    """

    commanded: StagePosition = StagePosition(0.0, 0.0, -160.0)
    true_pos: StagePosition | None = None
    backlash_accum: tuple[float, float, float] = (0.0, 0.0, 0.0)
    event_count: int = 0
    eps_per_event: float = 0.050
    eps_per_mm: float = 0.0
    limits: TravelLimits = field(default_factory=TravelLimits)

    def __post_init__(self) -> None:
        if self.true_pos is None:
            object.__setattr__(
                self,
                "true_pos",
                StagePosition(
                    self.commanded.x + self.backlash_accum[0],
                    self.commanded.y + self.backlash_accum[1],
                    self.commanded.z + self.backlash_accum[2],
                ),
            )
        if self.eps_per_event < 0 or self.eps_per_mm < 0:
            raise ValueError("backlash coefficients must be non-negative")
        if self.event_count < 0:
            raise ValueError("event_count must be non-negative")


def _per_axis_error(state: StageState, travel: float) -> float:
    if travel == 0.0:
        return 0.0
    return -math.copysign(1.0, travel) * (
        state.eps_per_event + state.eps_per_mm * abs(travel)
    )


def command_move(state: StageState, target: StagePosition) -> StageState:
    """Execute one move; returns the new state.

    A zero-length move is a no-op (no event). Otherwise each axis with
    nonzero travel accrues backlash against its travel direction and the
    event counter increments once.
    """
    if not state.limits.contains(target):
        raise MotionError(f"target {target} outside travel limits {state.limits}")
    travels = [getattr(target, n) - getattr(state.commanded, n) for n in AXES]
    if all(t == 0.0 for t in travels):
        return state
    accum = tuple(
        a + _per_axis_error(state, t) for a, t in zip(state.backlash_accum, travels)
    )
    return replace(
        state,
        commanded=target,
        true_pos=StagePosition(target.x + accum[0], target.y + accum[1], target.z + accum[2]),
        backlash_accum=accum,
        event_count=state.event_count + 1,
    )


def compensate(target: StagePosition, state: StageState) -> StagePosition:
    """Corrected command such that command_move lands the true position on target.

    Inverts the forward model per axis: subtract the accumulated error and
    pre-compensate the event this very move will add. The travel sign of the
    corrected command is found by fixed-point iteration (two rounds suffice;
    if the correction straddles zero travel the axis is left uncorrected for
    the event term, worst case one eps of residual).
    """
    corrected = {}
    for i, name in enumerate(AXES):
        t = getattr(target, name)
        here = getattr(state.commanded, name)
        accum = state.backlash_accum[i]
        c = t - accum
        for _ in range(2):
            travel = c - here
            c_new = t - accum - _per_axis_error(state, travel)
            if c_new == c:
                break
            c = c_new
        corrected[name] = c
    out = StagePosition(**corrected)
    if not state.limits.contains(out):
        raise MotionError(f"compensated command {out} outside travel limits")
    return out


@dataclass(frozen=True)
class SweepPlan:
    """Ordered sweep of one stage axis.

    pre_moves are executed before the waypoints; in unidirectional mode they
    overshoot past the first waypoint so every waypoint is approached moving
    in approach_direction.
    """

    axis: str
    values: tuple[float, ...]
    mode: str = "unidirectional"
    approach_direction: int = 0
    pre_moves: tuple[float, ...] = ()
    settle_policy: str = "none"

    def positions(self, base: StagePosition) -> list[StagePosition]:
        """Waypoints as full stage positions, other axes taken from base."""
        return [base.replace(**{self.axis: v}) for v in self.values]

    def pre_positions(self, base: StagePosition) -> list[StagePosition]:
        return [base.replace(**{self.axis: v}) for v in self.pre_moves]


def plan_sweep(
    axis: str,
    start: float,
    stop: float,
    n_points: int,
    mode: str = "unidirectional",
    overshoot_mm: float = DEFAULT_OVERSHOOT_MM,
    limits: TravelLimits | None = None,
) -> SweepPlan:
    """Evenly spaced sweep plan along one axis.

    In unidirectional mode a single pre-move overshoots the start point on
    the far side, so the first waypoint (and all later ones) is approached
    moving from start toward stop.
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if start == stop:
        raise ValueError("sweep range is empty")
    if mode not in ("unidirectional", "bidirectional"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    step = (stop - start) / (n_points - 1)
    values = tuple(start + i * step for i in range(n_points))
    direction = int(math.copysign(1.0, stop - start))
    pre: tuple[float, ...] = ()
    if mode == "unidirectional":
        pre = (start - direction * abs(overshoot_mm),)
        if limits is not None:
            lo, hi = getattr(limits, axis)
            pre = (min(max(pre[0], lo), hi),)
    return SweepPlan(
        axis=axis,
        values=values,
        mode=mode,
        approach_direction=direction if mode == "unidirectional" else 0,
        pre_moves=pre,
    )


def run_plan(
    state: StageState,
    plan: SweepPlan,
    base: StagePosition | None = None,
    compensated: bool = False,
) -> tuple[StageState, list[StageState]]:
    """Drive the stage through a plan; returns final state and per-waypoint states."""
    base = base if base is not None else state.commanded
    for p in plan.pre_positions(base):
        state = command_move(state, compensate(p, state) if compensated else p)
    visited: list[StageState] = []
    for p in plan.positions(base):
        state = command_move(state, compensate(p, state) if compensated else p)
        visited.append(state)
    return state, visited
