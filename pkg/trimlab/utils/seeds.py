"""Deterministic splitting of random number streams.

Stream `(master_seed, *key)` is the PCG64 generator seeded by
`numpy.random.SeedSequence(entropy=master_seed, spawn_key=key)`. Replica `i` of
a run uses key `(i,)`; batch blocks of the dependence estimator use
`(BATCH_DOMAIN, block)` and bootstrap resampling uses `(BOOTSTRAP_DOMAIN,)`.
The mapping depends only on its arguments, never on scheduling.
"""

from typing import Tuple

import numpy as np

BATCH_DOMAIN = 0x6D6978  # keeps batch blocks apart from replica streams
BOOTSTRAP_DOMAIN = 0x68696C6C

SeedKey = Tuple[int, ...]


def seed_sequence(master_seed: int, key: SeedKey = ()) -> np.random.SeedSequence:
    """Return the seed sequence of stream `(master_seed, *key)`."""
    if master_seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))


def generator(master_seed: int, key: SeedKey = ()) -> np.random.Generator:
    """Return the generator of stream `(master_seed, *key)`."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, key)))


def replica_key(replica: int) -> SeedKey:
    """Stream key of replica `replica`."""
    return (replica,)


def batch_key(block: int) -> SeedKey:
    """Stream key of batch block `block`."""
    return (BATCH_DOMAIN, block)


def bootstrap_key() -> SeedKey:
    """Stream key of bootstrap resampling."""
    return (BOOTSTRAP_DOMAIN,)
