"""Named random streams split from a run's master seed."""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Independent subsystems; adding draws in one never perturbs another."""

    INIT = 0
    MOBILITY = 1
    TRAFFIC = 2
    RADIO = 3


def stream(seed: int, name: Stream, *keys: int) -> np.random.Generator:
    """Return the generator for ``name`` (and optional sub-keys such as a UAV id)."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(int(name), *keys))
    return np.random.default_rng(sequence)
