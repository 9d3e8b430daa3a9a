"""Seeded generator derivation.

Every random draw in a run comes from one 64-bit seed. Independent streams
are keyed by a stage tag plus indices, so the outcome of one slot never
depends on how many draws another slot consumed.

    stage-1 candidates for route point k   -> (seed, 1, k)
    stage-2 positions for slot (k, eps)    -> (seed, 2, k, eps)
    direct-link fading for slot index i    -> (seed, 3, i)
"""
import numpy as np

STAGE1 = 1
STAGE2 = 2
FADING = 3


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))
