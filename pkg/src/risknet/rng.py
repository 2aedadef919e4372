"""Fixed, portable random number generator.

Simulation fixtures must be reproducible byte-for-byte from a seed alone, so
nothing here depends on a platform's default generator.  The core stream is
xoshiro256** seeded through splitmix64 (public-domain algorithms by Blackman
and Vigna), reimplemented with explicit 64-bit masking.  The integer stream
is exactly portable; float transforms (Box-Muller, Marsaglia-Tsang) inherit
the rounding of the local libm, which is stable on a given platform.

Pinned test vectors (first outputs of the raw 64-bit stream, also asserted in
the test suite):

    seed=0  -> 11091344671253066420, 13793997310169335082, 1900383378846508768
    seed=42 -> 1546998764402558742,  6990951692964543102, 12544586762248559009
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64_stream(seed: int, n: int) -> list[int]:
    out = []
    state = seed & _MASK64
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256:
    """xoshiro256** with splitmix64 seeding and a few scalar distributions.

    Every draw consumes a deterministic (or deterministically data-dependent,
    for rejection samplers) number of raw outputs, so a seed fully pins the
    stream.
    """

    def __init__(self, seed: int):
        if not isinstance(seed, int):
            raise TypeError("seed must be an int")
        self._s = _splitmix64_stream(seed, 4)
        self.seed = seed

    def next_uint64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """U(0, 1]; never returns 0.0 so log() is always safe."""
        return ((self.next_uint64() >> 11) + 1) * (2.0 ** -53)

    def normal(self) -> float:
        """One standard normal via Box-Muller (cosine branch, 2 raw draws)."""
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normals(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)])

    def gamma(self, shape: float) -> float:
        """Gamma(shape, 1) via Marsaglia-Tsang; requires shape >= 1."""
        if shape < 1.0:
            raise ValueError("gamma sampler requires shape >= 1")
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform()
            if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
                return d * v

    def chi_square(self, dof: float) -> float:
        """Chi-square with real dof > 2 (dof/2 >= 1 keeps the sampler simple)."""
        if dof <= 2.0:
            raise ValueError("chi_square requires dof > 2")
        return 2.0 * self.gamma(0.5 * dof)
