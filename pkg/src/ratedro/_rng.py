"""Counter-based random streams.

Streams are keyed by a tuple of nonnegative integers (for example
``(t_index, trial)``) mixed with the master seed through ``SeedSequence``,
so a given trial draws the same numbers whether it runs serially or in a
worker process.
"""
import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def bulk_stream(seed: int, *key: int) -> np.random.Generator:
    """Like :func:`stream` but backed by PCG64, which is faster for bulk draws."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
