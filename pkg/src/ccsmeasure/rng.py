"""Counter-based random streams.

Every stochastic routine draws from ``stream(seed, replica, substream)``:
a Philox generator keyed by ``seed XOR replica`` whose counter starts at
``substream``. Replica ``r`` gets the same numbers whatever the order in
which replicas are run.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def stream(seed: int, replica: int = 0, substream: int = 0) -> np.random.Generator:
    if seed < 0 or replica < 0 or substream < 0:
        raise ValueError("seed, replica and substream must be nonnegative")
    key = (int(seed) ^ int(replica)) & MASK64
    counter = np.array([0, 0, 0, int(substream) & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def as_generator(rng=None, seed=None) -> np.random.Generator:
    """Accept either a ready generator or a seed; one of them is required."""
    if rng is not None:
        return rng
    if seed is None:
        raise ValueError("an explicit seed or generator is required")
    return stream(seed)
