"""SplitMix64, the fixed PRNG behind every generator.

Kept explicit (rather than ``random``/numpy) so generated instances are a
documented function of the seed that any implementation can reproduce:

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)                      (all arithmetic mod 2**64)

Bounded integers use rejection sampling: draw ``r`` until
``r < 2**64 - (2**64 % bound)`` and return ``r % bound``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def bit(self) -> int:
        return self.next_u64() >> 63

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(base: int, *keys: int) -> int:
    """Deterministic child seed for (base, key, ...) pairs."""
    r = SplitMix64(base)
    s = r.next_u64()
    for k in keys:
        s = SplitMix64(s ^ (k & MASK64)).next_u64()
    return s
