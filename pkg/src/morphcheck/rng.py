"""Deterministic, platform-independent randomness for stochastic transforms.

All transform randomness is derived from (seed, input id) via fnv1a64 and a
splitmix64 stream, never from global state, so identical (transform, text)
pairs produce identical output across runs and platforms.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1


def fnv1a64(data: str) -> int:
    """FNV-1a 64-bit hash of a UTF-8 string."""
    h = 0xCBF29CE484222325
    for byte in data.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


class SplitMix64:
    """Tiny deterministic PRNG (splitmix64)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def stream_for(seed: int, text_id: str) -> SplitMix64:
    """The per-input random stream: seeded by (seed XOR fnv1a64(id))."""
    return SplitMix64(seed ^ fnv1a64(text_id))
