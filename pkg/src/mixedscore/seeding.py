"""Deterministic seed derivation.

All randomness goes through numpy's PCG64 generator. Child seeds are
derived by hashing the parent seed together with integer keys through
``numpy.random.SeedSequence``, so the seed a repetition (or k-means
restart) receives depends only on its keys, never on execution order.
"""
import numpy as np


def derive_seed(*keys) -> int:
    """Hash non-negative integer keys into a 64-bit seed."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(*keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*keys))
