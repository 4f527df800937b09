"""Counter-based random streams with explicit splitting.

Every stochastic routine takes a `numpy.random.Generator`. Streams are
derived from a base seed plus an integer path, so independent tasks
(trials, sweep points) can draw from non-overlapping, reproducible
substreams without sharing state.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return a Philox generator for `seed` split along `path`.

    Identical (seed, path) pairs always produce identical streams;
    distinct paths are statistically independent.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))
