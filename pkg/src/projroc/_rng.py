"""Deterministic random streams keyed by integer labels.

Every stochastic step draws from a generator seeded by
``SeedSequence([seed, *keys])`` so results never depend on the order in
which tasks are scheduled or on the number of workers.
"""

from __future__ import annotations

import numpy as np

POP_F = 0
POP_G = 1
DIRECTIONS_F = 2
DIRECTIONS_G = 3
SIM_DATA = 10
SIM_TEST = 11


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def derived_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed derived from ``seed`` and ``keys``."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def resample_indices(seed: int, population: int, b: int, n: int) -> np.ndarray:
    """Row indices of bootstrap replicate ``b`` for one population."""
    return stream(seed, population, b).integers(0, n, size=n)


def resample_index_matrix(seed: int, population: int, n: int, B: int) -> np.ndarray:
    return np.vstack([resample_indices(seed, population, b, n) for b in range(B)])
