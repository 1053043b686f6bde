"""Seeded random streams.

A ``(seed, stream)`` pair maps to an independent PCG64 generator through
``SeedSequence(seed, spawn_key=(stream,))``, so Monte Carlo chunks own
disjoint streams and results do not depend on scheduling.
"""

from __future__ import annotations

import os
from typing import NamedTuple

import numpy as np

SEED_ENV_VAR = "OCCTIME_SEED"
FALLBACK_SEED = 20240101


class Seed(NamedTuple):
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    return int(raw) if raw else FALLBACK_SEED


def as_generator(seed=None, stream: int = 0) -> np.random.Generator:
    """Coerce ``seed`` (int, :class:`Seed`, Generator or None) to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, Seed):
        return seed.generator()
    if seed is None:
        seed = default_seed()
    return Seed(int(seed), stream).generator()
