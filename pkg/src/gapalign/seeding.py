"""Deterministic per-trial random streams.

A trial's seed is derived from ``(master, cell, trial)`` with the SplitMix64
finalizer::

    mix64(z):  z += 0x9E3779B97F4A7C15
               z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
               z = (z ^ (z >> 27)) * 0x94D049BB133111EB
               return z ^ (z >> 31)          (all arithmetic mod 2^64)

    derive_seed(master, cell, trial) = mix64(mix64(mix64(master) ^ cell) ^ trial)

The seed is the key of a Philox-4x64 counter-based generator (numpy's
``Philox(key=seed)``, counter starting at 0).  Trial streams are independent of
how trials are batched or distributed across workers.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, cell: int, trial: int) -> int:
    return mix64(mix64(mix64(master & MASK64) ^ cell) ^ trial)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & MASK64))


def trial_rng(master: int, cell: int, trial: int) -> np.random.Generator:
    return make_rng(derive_seed(master, cell, trial))
