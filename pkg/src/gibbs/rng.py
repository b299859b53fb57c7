"""Seeded random streams.

Every stream is a Philox (counter-based) generator keyed by a 64-bit seed.
Chunked work derives one child stream per chunk with

    child_seed(parent, index) = mix64(parent XOR index)

so results never depend on the order in which chunks are scheduled.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z = (int(z) + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def child_seed(parent: int, index: int) -> int:
    return mix64((int(parent) & MASK64) ^ (int(index) & MASK64))


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=mix64(seed)))


def normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal variates by the Marsaglia polar method."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    total = int(np.prod(shape))
    out = np.empty(total)
    filled = 0
    while filled < total:
        pairs = max((total - filled + 1) // 2, 16)
        # acceptance is pi/4; oversample so one pass is usually enough
        m = int(pairs * 1.3) + 8
        u = 2.0 * rng.random(m) - 1.0
        v = 2.0 * rng.random(m) - 1.0
        s = u * u + v * v
        ok = (s > 0.0) & (s < 1.0)
        u, v, s = u[ok], v[ok], s[ok]
        f = np.sqrt(-2.0 * np.log(s) / s)
        z = np.concatenate([u * f, v * f])
        take = min(z.size, total - filled)
        out[filled:filled + take] = z[:take]
        filled += take
    return out.reshape(shape)


def exponential(rng: np.random.Generator, size) -> np.ndarray:
    return -np.log1p(-rng.random(size))


def gamma3(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    """Gamma(3, scale) as a sum of three unit exponentials."""
    return scale * exponential(rng, (3, n)).sum(axis=0)


def unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    z = normal(rng, (n, 3))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
