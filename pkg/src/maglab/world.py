"""Composition of field sources, qubit model, and stage into one virtual lab.

The world owns the single mutable stage state plus a deterministic stream of
per-run random seeds derived from one master seed. Experiments read the field
at the sample for the *true* magnet position (including backlash), while all
bookkeeping reports the commanded position, exactly like the real setup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from maglab import defaults
from maglab.magnetics import (
    FieldVector,
    MagnetSpec,
    SolenoidSpec,
    StagePosition,
    total_field,
)
from maglab.spinmodel import (
    QubitModel,
    coherence_times,
    larmor_frequency,
    out_of_plane_angle,
)
from maglab.stage import StageState, command_move, compensate


@dataclass
class World:
    """One virtual lab instance. Not thread-safe; serialize mutations."""

    magnet: MagnetSpec
    solenoid: SolenoidSpec
    qubit: QubitModel
    stage: StageState
    master_seed: int = 2024
    spurious_line_hz: float | None = None
    #: random-walk step per run for slow f_L drift; 0 disables (default)
    drift_amplitude_hz: float = 0.0
    run_counter: int = field(default=0, init=False)
    drift_offset_hz: float = field(default=0.0, init=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def default(cls, master_seed: int = 2024, qubit: QubitModel | None = None) -> "World":
        stage = StageState(commanded=defaults.HOME_POSITION)
        return cls(
            magnet=defaults.default_magnet(stage.true_pos),
            solenoid=defaults.default_solenoid(),
            qubit=qubit if qubit is not None else defaults.default_qubit(),
            stage=stage,
            master_seed=master_seed,
        )

    # -- stage -------------------------------------------------------------

    def move_to(self, target: StagePosition, compensated: bool = False) -> StageState:
        cmd = compensate(target, self.stage) if compensated else target
        self.stage = command_move(self.stage, cmd)
        self.magnet = self.magnet.at_position(self.stage.true_pos)
        return self.stage

    def set_solenoid(self, tesla: float) -> SolenoidSpec:
        self.solenoid = SolenoidSpec(
            setpoint_t=tesla,
            axis=self.solenoid.axis,
            external_attenuation=self.solenoid.external_attenuation,
        )
        return self.solenoid

    # -- physics truth (not available to a real experiment) ----------------

    def field_at_sample(self) -> FieldVector:
        return total_field(self.solenoid, self.magnet)

    def larmor_truth(self) -> float:
        return larmor_frequency(self.qubit.g, self.field_at_sample())

    def angle_truth(self) -> float:
        """Out-of-plane angle of the current total field, degrees."""
        return out_of_plane_angle(self.field_at_sample(), self.qubit.plane_normal)

    def coherence_truth(self) -> tuple[float, float]:
        return coherence_times(self.qubit, self.angle_truth())

    def advance_drift(self, rng: np.random.Generator) -> float:
        """Step the slow Larmor drift once and return the current offset.

        Draws nothing when drift is disabled, so default worlds keep their
        run-by-run reproducibility regardless of this feature.
        """
        if self.drift_amplitude_hz > 0.0:
            self.drift_offset_hz += float(rng.normal(0.0, self.drift_amplitude_hz))
        return self.drift_offset_hz

    # -- randomness --------------------------------------------------------

    def next_rng(self) -> tuple[str, np.random.Generator]:
        """Fresh generator for one run; the seed tag reproduces it exactly."""
        idx = self.run_counter
        self.run_counter += 1
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(idx,))
        return f"{self.master_seed}:{idx}", np.random.default_rng(seq)

    @staticmethod
    def rng_from_tag(tag: str) -> np.random.Generator:
        master, idx = tag.split(":")
        seq = np.random.SeedSequence(entropy=int(master), spawn_key=(int(idx),))
        return np.random.default_rng(seq)
