"""Seeded random number generation.

Every random draw in the package goes through :func:`make_rng`, which wraps
numpy's PCG64 bit generator. PCG64 output for a given seed is stable across
platforms and numpy releases, so seeded fixtures are portable.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def derive_seed(seed: int, *keys: int) -> int:
    """Mix ``seed`` with integer ``keys`` into a fresh 64-bit seed."""
    ss = np.random.SeedSequence([seed & MASK64, *[k & MASK64 for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
