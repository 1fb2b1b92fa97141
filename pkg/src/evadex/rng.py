"""Seeded RNG streams.

Every randomized operation draws from a stream keyed by (seed, *keys) so
per-sample work is reproducible and independent of scheduling order.
"""

import numpy as np


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Return a Generator for the stream identified by seed and extra keys."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys)))
