"""Portable deterministic PRNG (splitmix64).

Every stochastic choice in the toolkit (split sampling, batch order) draws
from this generator so that a seed reproduces identical results in any
implementation of the same recipe. The generator is the standard splitmix64
sequence:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output = z ^ (z >> 31)

all in 64-bit unsigned arithmetic. Bounded draws use modulo reduction
(the tiny modulo bias is irrelevant for sampling work); shuffles are
Fisher-Yates from the top index down.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Stream tags keep the split, batch-order, and any future substreams of one
# user seed statistically independent.
STREAM_SPLIT = 0x53504C4954       # "SPLIT"
STREAM_BATCH = 0x4241544348       # "BATCH"


def _scramble(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def mix_seed(seed: int, *parts: int) -> int:
    """Derive a substream seed from a base seed and integer tags."""
    state = seed & _MASK
    for p in parts:
        state = _scramble(((state ^ (p & _MASK)) + _GOLDEN) & _MASK)
    return state


class SplitMix64:
    """splitmix64 stream; deterministic and cheap to seed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _scramble(self._state)

    def next_below(self, n: int) -> int:
        """Uniform-ish draw in [0, n) via modulo reduction."""
        if n <= 0:
            raise ValueError(f"next_below requires n >= 1, got {n}")
        return self.next_u64() % n

    def shuffle(self, items) -> None:
        """In-place Fisher-Yates shuffle (works on lists and 1-D arrays)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
