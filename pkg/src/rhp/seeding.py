"""Deterministic random-stream derivation.

One master seed governs a whole batch; replicate r draws from the generator
seeded with SeedSequence([master_seed, r]).  Substreams are therefore
independent, order-insensitive, and reproducible bit for bit: rerunning with
the same (seed, replicate) pair replays the identical draw sequence.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, *indices: int) -> np.random.Generator:
    """Generator for one replicate (or nested index path) of a seeded batch."""
    if master_seed < 0 or any(i < 0 for i in indices):
        raise ValueError("seed and replicate indices must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, indices)]))
