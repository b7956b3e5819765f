"""Deterministic random-stream derivation.

A run owns a single 64-bit master seed.  Independent substreams for
realizations (or any other parallel unit of work) are derived by
spawning the seed sequence along a fixed integer path, so results never
depend on scheduling or worker count and any realization can be
reproduced in isolation.
"""
from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """PCG64 generator for the stream identified by ``(seed, *path)``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))
