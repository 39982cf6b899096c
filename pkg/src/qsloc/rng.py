"""Seeded random-number streams.

Every public sampling entry point takes an explicit seed.  A seed is either
a single non-negative integer or a tuple of them; tuples name derived
streams, so independent sub-tasks draw from generators built as
``(master_seed, task_index, ...)`` and produce the same numbers whether the
tasks run serially or in parallel.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

Seed = int | tuple[int, ...]


def _entropy(seed: Seed) -> tuple[int, ...]:
    parts = seed if isinstance(seed, tuple) else (seed,)
    out = []
    for p in parts:
        p = int(p)
        if p < 0:
            raise ValidationError(f"seed components must be non-negative, got {p}")
        out.append(p)
    if not out:
        raise ValidationError("seed must have at least one component")
    return tuple(out)


def rng_from(seed: Seed) -> np.random.Generator:
    """Generator for the given seed, PCG64 behind a SeedSequence."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed)))


def derive_rng(seed: Seed, *path: int) -> np.random.Generator:
    """Generator for the stream named by appending ``path`` to ``seed``."""
    return rng_from(_entropy(seed) + tuple(int(p) for p in path))
