"""Deterministic RNG substreams for parallel-safe Monte Carlo.

Every random draw in the package goes through a generator built here.
Substreams are keyed by a master seed plus an integer path (for example
``(k_index, w_index, replicate)``), so the same work unit always sees the
same stream no matter which thread or process executes it, or in which
order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "spawn_seed"]


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return a counter-based generator for the substream ``seed / path``.

    Uses Philox keyed through a ``SeedSequence`` spawn key, so distinct
    paths give statistically independent streams and identical paths give
    bit-identical streams.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def spawn_seed(seed: int, *path: int) -> int:
    """Derive a 63-bit child seed from a master seed and an integer path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
