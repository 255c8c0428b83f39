"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from maglab.magnetics import MagnetSpec, StagePosition
from maglab.world import World


@pytest.fixture
def home_spec() -> MagnetSpec:
    """Default magnet parked at the reference gap, pitch included."""
    from maglab.defaults import default_magnet

    return default_magnet()


@pytest.fixture
def flat_spec() -> MagnetSpec:
    """Untilted magnet at the lab origin, magnetized along +z."""
    return MagnetSpec(dims=(110.6, 89.0, 19.5), remanence_t=1.35,
                      position=StagePosition(0.0, 0.0, 0.0))


@pytest.fixture
def world() -> World:
    return World.default(master_seed=2024)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
