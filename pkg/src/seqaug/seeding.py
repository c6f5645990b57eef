"""Deterministic seed derivation built on splitmix64.

Every random decision in the package (sequence seeds, sampler slot draws,
augmentation parameters, weight init seeds) is derived from integers via
the functions here, so any subset of the work can be recomputed
independently and results never depend on evaluation order or on the
stream state of a shared generator.

The mixing function is fixed and documented below; it must stay stable
across releases because on-disk stores record seeds produced by it.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# splitmix64 constants (Steele, Lea & Flood's SplittableRandom finalizer)
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """The splitmix64 output function applied to a 64-bit state."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def mix(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed.

    Definition: h starts at 0; for each part p (reduced mod 2**64),
    h = splitmix64(h + p).  Order-sensitive, stable across releases.
    """
    h = 0
    for p in parts:
        h = splitmix64((h + (p & MASK64)) & MASK64)
    return h


def sequence_seed(base_seed: int, i: int, j: int) -> int:
    """Per-sequence generation seed: mix(base_seed, i, j).

    Kept as a named function so stores and providers agree on exactly
    one derivation and any (i, j) sequence can be regenerated alone.
    """
    return mix(base_seed, i, j)


class SplitMix64:
    """Sequential splitmix64 stream for scalar draws.

    Output n is splitmix64(seed + (n+1) * GOLDEN), matching the
    vectorized helpers below position for position.
    """

    def __init__(self, seed: int):
        self._seed = seed & MASK64
        self._n = 0

    def next_u64(self) -> int:
        self._n += 1
        return splitmix64((self._seed + self._n * GOLDEN) & MASK64)

    def random(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution: (u64 >> 11) * 2**-53."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)


# ---------------------------------------------------------------------------
# vectorized counterparts (numpy uint64 arithmetic, silent wraparound)

_NP_GOLDEN = np.uint64(GOLDEN)
_NP_MIX1 = np.uint64(_MIX1)
_NP_MIX2 = np.uint64(_MIX2)


def _finalize_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _NP_MIX1
    z = (z ^ (z >> np.uint64(27))) * _NP_MIX2
    return z ^ (z >> np.uint64(31))


def hash_u64(seed: int, idx: np.ndarray) -> np.ndarray:
    """Vectorized stream: element n is splitmix64(seed + (idx[n]+1)*GOLDEN)."""
    idx = np.asarray(idx, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _finalize_np(np.uint64(seed & MASK64) + (idx + np.uint64(1)) * _NP_GOLDEN)


def unit_from_u64(h: np.ndarray) -> np.ndarray:
    """Map uint64 hashes to float64 in [0, 1), same convention as SplitMix64.random."""
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
