"""Portable pseudo-random numbers.

The generator is xorshift64* seeded through one round of splitmix64, so a
seed reproduces the same stream in any language with 64-bit integers::

    seed:   s = seed mod 2^64
            s = s + 0x9E3779B97F4A7C15
            z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9
            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
            state = z ^ (z >> 31)          (replaced by 1 if zero)
    step:   x ^= x >> 12; x ^= x << 25; x ^= x >> 27     (all mod 2^64)
            output = x * 0x2545F4914F6CDD1D mod 2^64

Derived draws:

* ``random()``: ``(output >> 11) * 2^-53`` in ``[0, 1)``.
* ``randint(lo, hi)``: rejection sampling on ``output`` so every value in the
  inclusive range is equally likely.
* ``normal()``: Box-Muller on two ``random()`` draws (cosine branch only).
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

_M64 = (1 << 64) - 1


def _splitmix64(seed: int) -> int:
    s = (seed + 0x9E3779B97F4A7C15) & _M64
    z = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


class XorShift64Star:
    """Deterministic generator; see the module docstring for the exact recipe."""

    def __init__(self, seed: int = 0):
        self.state = _splitmix64(seed & _M64) or 1

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _M64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _M64

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        span = hi - lo + 1
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            v = self.next_u64()
            if v < limit:
                return lo + v % span

    def rational(self, lo: int = -2, hi: int = 2, den: int = 7) -> Fraction:
        """Uniform draw from ``{p/den : lo*den <= p <= hi*den}``."""
        return Fraction(self.randint(lo * den, hi * den), den)

    def normal(self) -> float:
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normal_array(self, *shape: int) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        return np.array([self.normal() for _ in range(n)]).reshape(shape)

    def uniform_array(self, lo: float, hi: float, *shape: int) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        return np.array([self.uniform(lo, hi) for _ in range(n)]).reshape(shape)
