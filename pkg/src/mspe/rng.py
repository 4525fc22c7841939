"""Seeded counter-based random number generation.

All stochastic paths draw from Philox generators so identical seeds give
identical streams on every platform, independent of global RNG state.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for (seed, stream); streams keep independent
    consumers (noise maps, timestep draws, data order) from interleaving."""
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(size=shape).astype(np.float32)
