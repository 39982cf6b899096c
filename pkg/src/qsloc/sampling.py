"""Shot sampling over measured-qubit distributions.

The default strategy draws all shots from the exact final marginal in one
multinomial, which matches running the circuit once per shot but costs a
single evaluation.  Readout noise, when enabled, flips each measured bit of
each shot independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import Seed, rng_from

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ShotCounts:
    """Occurrences of each (ancilla bit, index value) pair over ``total_shots`` runs.

    ``index_bits`` is the width of the index part of each outcome;  outcomes
    are split as ``ancilla = outcome >> index_bits`` and
    ``index = outcome & (2**index_bits - 1)``.  Only observed pairs appear
    in ``counts``.
    """

    counts: dict[tuple[int, int], int]
    total_shots: int
    index_bits: int

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.total_shots:
            raise ValidationError(
                f"counts sum to {total} but total_shots is {self.total_shots}"
            )

    def joint(self, ancilla_bit: int, index: int) -> int:
        return self.counts.get((ancilla_bit, index), 0)

    def index_total(self, index: int) -> int:
        return self.joint(0, index) + self.joint(1, index)


def sample_counts(
    dist: np.ndarray,
    shots: int,
    seed: Seed,
    readout_flip_prob: float | None = None,
    *,
    index_bits: int | None = None,
) -> ShotCounts:
    """Draw ``shots`` outcomes from ``dist``, deterministically in ``seed``.

    ``dist`` is a probability table over ``2**b`` outcomes whose top bit is
    the ancilla (``index_bits`` defaults to ``b - 1``).  Raises
    ValidationError for ``shots < 1`` or an unnormalized table.
    """
    dist = np.asarray(dist, dtype=float)
    if shots < 1:
        raise ValidationError(f"shot count must be >= 1, got {shots}")
    if dist.ndim != 1 or dist.size < 1 or (dist.size & (dist.size - 1)) != 0:
        raise ValidationError(f"distribution must have a power-of-two size, got {dist.shape}")
    if np.any(dist < 0):
        raise ValidationError("distribution has negative entries")
    total = float(dist.sum())
    if abs(total - 1.0) > _SUM_TOL:
        raise ValidationError(f"distribution sums to {total}, not 1")
    bits = dist.size.bit_length() - 1
    if index_bits is None:
        index_bits = max(bits - 1, 0)
    if index_bits < 0 or index_bits > bits:
        raise ValidationError(f"index_bits {index_bits} out of range for {bits} measured bits")

    rng = rng_from(seed)
    raw = rng.multinomial(shots, dist / total)

    flip = float(readout_flip_prob or 0.0)
    if flip > 0.0 and bits > 0:
        per_shot = np.repeat(np.arange(dist.size), raw)
        flips = rng.random((shots, bits)) < flip
        masks = flips @ (1 << np.arange(bits))
        per_shot ^= masks.astype(per_shot.dtype)
        raw = np.bincount(per_shot, minlength=dist.size)

    index_mask = (1 << index_bits) - 1
    counts: dict[tuple[int, int], int] = {}
    for outcome, c in enumerate(raw):
        if c > 0:
            counts[(outcome >> index_bits, outcome & index_mask)] = int(c)
    return ShotCounts(counts=counts, total_shots=shots, index_bits=index_bits)
