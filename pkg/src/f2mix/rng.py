"""Seeded randomness.

Every generator is a Philox (counter-based) stream derived from a 64-bit
master seed through ``SeedSequence``; independent sub-streams come from
``spawn``.  Nothing reads global random state.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    return np.random.Generator(np.random.Philox(seed))


def spawn(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    return rng.spawn(n)


def random_bits(rng: np.random.Generator, nbits: int) -> int:
    """Uniform integer in ``[0, 2**nbits)``."""
    if nbits <= 0:
        return 0
    raw = int.from_bytes(rng.bytes((nbits + 7) // 8), "little")
    return raw & ((1 << nbits) - 1)


def random_words(rng: np.random.Generator, count: int, nbits: int) -> np.ndarray:
    """``count`` uniform ``nbits``-bit rows in packed ``uint64`` layout."""
    words = max(1, (nbits + 63) // 64)
    out = rng.integers(0, 2**64, size=(count, words), dtype=np.uint64, endpoint=False)
    tail = nbits - 64 * (words - 1)
    if nbits <= 0:
        out[:] = 0
    elif tail < 64:
        out[:, -1] &= np.uint64((1 << tail) - 1)
    return out
