"""Seeding conventions used across the package.

Every randomized routine takes an explicit integer seed (or an already
constructed ``numpy.random.Generator``) and is bit-reproducible given it.
The stream-splitting rule for multi-trial experiments is:

    trial_seed_sequence = SeedSequence(entropy=master_seed, spawn_key=(trial,))

so trial streams are independent, portable across platforms (PCG64), and a
trial's stream depends only on ``(master_seed, trial_index)`` — never on how
many trials run, in what order, or on which worker.
"""

from __future__ import annotations

import numpy as np

RngLike = "int | np.random.Generator"


def generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Return a PCG64 Generator for ``seed``; pass Generators through unchanged.

    Only true integers are accepted as seeds (floats would truncate silently
    and alias distinct seeds).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def trial_generator(master_seed: int, trial: int) -> np.random.Generator:
    """Generator for one trial of a multi-trial experiment (see module docstring)."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(seq))


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit integer seed derived for one trial (recorded in run artifacts)."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
