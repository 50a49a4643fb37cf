"""Deterministic randomness for shuffles, sampling, and seed derivation.

The stdlib makes no cross-version guarantee for ``random.shuffle``, so the
harness pins its own generator: SplitMix64 (Steele, Lea & Flood, "Fast
splittable pseudorandom number generators", OOPSLA 2014). The algorithm is
frozen here; identical seeds produce identical streams on every platform
and Python version.
"""

from __future__ import annotations

import hashlib
from typing import MutableSequence

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream over a 64-bit state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def coin(self) -> bool:
        return bool(self.next_u64() >> 63)


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from heterogeneous parts (run seed, doc id, k, ...).

    Uses BLAKE2b so adding or removing one document never perturbs the
    seeds derived for the others.
    """
    joined = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(joined, digest_size=8).digest(), "big")


def fisher_yates(items: MutableSequence, rng: SplitMix64) -> None:
    """In-place Fisher-Yates shuffle driven by ``rng``."""
    for i in range(len(items) - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]
