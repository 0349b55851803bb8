"""Seeded random streams.

Every random draw in the package comes from a Philox counter-based
generator (``numpy.random.Philox``) keyed by a ``SeedSequence``. Child
streams are addressed by integer keys, so a result never depends on the
order in which independent cells are evaluated.
"""

import zlib

import numpy as np


def seed_sequence(seed, *key) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        if not key:
            return seed
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    if seed is None:
        seed = 0
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def make_rng(seed, *key) -> np.random.Generator:
    if isinstance(seed, np.random.Generator) and not key:
        return seed
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))


def name_key(name: str) -> int:
    """Stable integer key for a string (independent of PYTHONHASHSEED)."""
    return zlib.crc32(name.encode("utf-8"))
