# core/rng.py

"""
Seeded random streams.

Every random draw in the toolkit comes from a generator built here, keyed by
(seed, purpose, *indices). Streams with different keys are independent, and a
given key always yields the same numbers, so work can be split across threads
in any order.
"""
import numpy as np

NOISE = 0
SHOTS = 1
TESTS = 2


def stream(seed: int, purpose: int, *indices: int) -> np.random.Generator:
    """Return the generator for one (seed, purpose, indices) key.

    Args:
        seed: Root seed of the run
        purpose: Stream namespace (NOISE, SHOTS, ...)
        *indices: Batch, block or slot indices below the namespace

    Returns:
        numpy Generator backed by PCG64
    """
    if seed is None:
        raise ValueError("A seed is required; ambient entropy is not used.")
    key = (int(purpose),) + tuple(int(i) for i in indices)
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.default_rng(sequence)
