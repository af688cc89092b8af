"""Portable seeded random numbers.

SplitMix64 (Steele, Lea & Flood 2014; the seeding generator of the xoshiro
family).  The stream depends only on 64-bit integer arithmetic, so equal
seeds give equal streams on every platform.  Reference: seeding with 0
yields 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F first.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed (order-sensitive)."""
    state = 0
    for p in parts:
        state = mix64((state + GOLDEN + (p & MASK64)) & MASK64)
    return state


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` by rejection (no modulo bias)."""
        if m <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - (1 << 64) % m
        while True:
            x = self.next_u64()
            if x < limit:
                return x % m

    def sample(self, population: int, size: int) -> list[int]:
        """``size`` distinct values of ``range(population)``, partial Fisher-Yates."""
        pool = list(range(population))
        for i in range(size):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:size]

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
