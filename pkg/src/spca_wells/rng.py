"""Seeded, splittable random streams.

Every stream is a Philox-4x64 counter-based generator keyed by ``(seed, stream)``.
All randomness in the package is drawn from :meth:`Rng.uniforms`; Gaussians are
produced by the Box-Muller transform so that draw order is fully specified.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

_MASK64 = (1 << 64) - 1
_BUFFER = 1024


def derive_stream(*parts: int) -> int:
    """Hash a tuple of integers into a 64-bit stream id."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(int(p).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


class Rng:
    """A single owned random stream identified by ``(seed, stream)``."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))
        self._buf = np.empty(0)
        self._pos = 0

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"

    def spawn(self, *path: int) -> "Rng":
        """Independent child stream; deterministic in ``(seed, stream, path)``."""
        return Rng(self.seed, derive_stream(self.stream, *path))

    def uniform(self) -> float:
        """Next uniform double in [0, 1)."""
        if self._pos >= self._buf.size:
            self._buf = self._gen.random(_BUFFER)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)

    def uniforms(self, count: int) -> np.ndarray:
        """Next ``count`` uniforms, continuing the same sequence as :meth:`uniform`."""
        head = self._buf[self._pos:self._pos + count]
        self._pos += head.size
        rest = count - head.size
        if rest <= 0:
            return head.copy()
        return np.concatenate([head, self._gen.random(rest)])

    def integer(self, m: int) -> int:
        """Uniform integer in [0, m) from one uniform draw."""
        return min(int(self.uniform() * m), m - 1)

    def normals(self, count: int) -> np.ndarray:
        """Standard normals by Box-Muller; pair j uses uniforms 2j, 2j+1 and yields (cos, sin)."""
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * math.pi * u[:, 1]
        z = np.empty((pairs, 2))
        z[:, 0] = radius * np.cos(angle)
        z[:, 1] = radius * np.sin(angle)
        return z.reshape(-1)[:count]
