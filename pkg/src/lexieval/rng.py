"""Portable, counter-based pseudo-random numbers.

Every random choice in the package (synthetic data, label and query
removal) draws from :class:`SplitMix64` so that a seed reproduces the same
stream in any language.  The generator is fully specified here:

* state: unsigned 64-bit ``seed`` and a counter ``n`` starting at 0
* output ``n``: ``mix64(seed + (n + 1) * 0x9E3779B97F4A7C15 mod 2**64)``
* ``mix64(z)``::

      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      z =  z ^ (z >> 31)

  (all arithmetic mod 2**64).  This is Steele et al.'s SplitMix64.

Derived quantities:

* ``randbelow(m)``: draw ``x`` until ``x < floor(2**64 / m) * m``, return
  ``x mod m`` (unbiased rejection).
* ``random()``: ``(x >> 11) * 2**-53``, uniform on [0, 1).
* ``sample(items, k)``: the first ``k`` slots of a forward Fisher-Yates pass,
  swap index ``i + randbelow(len - i)`` into slot ``i``.
* ``derive(seed, *keys)``: child seed, ``mix64(acc + (key + 1) * GOLDEN)``
  folded left over the keys starting from ``acc = seed``.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *keys: int) -> int:
    """Deterministically derive an independent child seed from ``seed``."""
    acc = seed & MASK64
    for key in keys:
        acc = mix64(acc + ((key + 1) * GOLDEN & MASK64))
    return acc


class SplitMix64:
    """Counter-based 64-bit generator; see the module docstring for the exact stream."""

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.seed + self.counter * GOLDEN)

    def randbelow(self, m: int) -> int:
        if m <= 0:
            raise ValueError("randbelow requires m >= 1")
        limit = ((1 << 64) // m) * m
        while True:
            x = self.next_u64()
            if x < limit:
                return x % m

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: MutableSequence[T]) -> None:
        n = len(items)
        for i in range(n - 1):
            j = i + self.randbelow(n - i)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: Sequence[T], k: int) -> list[T]:
        """Uniform sample of ``k`` items without replacement, in draw order."""
        n = len(items)
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n} items")
        # Same stream as repeated randbelow calls, inlined: this sits on the
        # hot path of synthetic data generation and label removal.
        pool = list(items)
        seed, c = self.seed, self.counter
        for i in range(k):
            m = n - i
            limit = ((1 << 64) // m) * m
            while True:
                c += 1
                z = (seed + c * GOLDEN) & MASK64
                z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
                z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
                z ^= z >> 31
                if z < limit:
                    break
            j = i + z % m
            pool[i], pool[j] = pool[j], pool[i]
        self.counter = c
        return pool[:k]
