"""Deterministic random streams.

Every trial gets its own ``numpy.random.Generator``.  Streams are derived
from a key tuple (master seed, cell index, trial index) through
``numpy.random.SeedSequence``, which hashes the whole key, so streams for
different keys are independent and the derivation does not depend on the
order in which trials are scheduled.
"""

import os

import numpy as np

SEED_ENV = "POWERSAT_SEED"
DEFAULT_SEED = 20190601


def default_master_seed() -> int:
    value = os.environ.get(SEED_ENV)
    return int(value) if value else DEFAULT_SEED


def derive_seed(*key: int) -> int:
    """A 63-bit integer seed determined by the key tuple."""
    state = np.random.SeedSequence([int(k) for k in key]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_stream(*key: int) -> np.random.Generator:
    return stream(derive_seed(*key))
