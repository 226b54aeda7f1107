"""Portable deterministic random numbers.

Cross-validation folds and data splits must come out bit-identical on every
platform and in every implementation, so they cannot depend on a particular
numpy version.  This module pins down a tiny xorshift-family generator
(xorshift64* with a splitmix64 seed scrambler) and a plain Fisher-Yates
shuffle on top of it.  Model-internal randomness (parameter init, dropout)
uses numpy generators instead, where only within-platform reproducibility is
required.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


class Xorshift64Star:
    """xorshift64* generator; state seeded through splitmix64 so that small
    or zero seeds still produce well-mixed streams."""

    def __init__(self, seed: int):
        # splitmix64 step; also guarantees a nonzero xorshift state
        z = (seed + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = z ^ (z >> 31)
        self.state = z if z != 0 else 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK64
        x ^= (x >> 27)
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def randint(self, n: int) -> int:
        """Uniform-ish integer in [0, n).  Plain modulo; the bias is
        negligible for n <<< 2**64 and keeps the sequence easy to reproduce
        in any language."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, iterating from the last element down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def shuffled_indices(n: int, seed: int) -> list[int]:
    idx = list(range(n))
    Xorshift64Star(seed).shuffle(idx)
    return idx
