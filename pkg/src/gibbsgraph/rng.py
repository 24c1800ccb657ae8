"""Explicitly seeded random streams.

Every sampling entry point takes a 64-bit unsigned seed.  Streams are PCG64
generators keyed by a :class:`numpy.random.SeedSequence`, so sub-streams for
replicas are derived deterministically instead of drawn from global state.
"""
from __future__ import annotations

import numpy as np

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) <= SEED_MAX:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for ``seed``; ``stream`` keys select independent sub-streams."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *stream: int) -> int:
    """A fresh 64-bit seed for sub-stream ``stream`` of ``seed``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in stream))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
