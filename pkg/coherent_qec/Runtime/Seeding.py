# coherent_qec/Runtime/Seeding.py

import numpy as np


def sample_rng(seed: int, sample: int, attempt: int = 0) -> np.random.Generator:
    """
    Independent stream for one Monte-Carlo sample.

    The stream depends only on (seed, sample, attempt), never on which worker
    runs the sample, so results do not change with the worker count.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(sample, attempt)))


def point_seed(seed: int, point: int) -> int:
    """Root seed for one point of a sweep, derived from the run seed."""
    state = np.random.SeedSequence(seed, spawn_key=(point,)).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])
