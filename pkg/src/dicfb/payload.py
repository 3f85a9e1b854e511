"""Seeded per-user payload bit streams."""

import numpy as np

CHUNK = 1024


class PayloadSource:
    """Two independent, reproducible streams of uniform payload bits.

    Each user's stream comes from its own child of ``SeedSequence(seed)``,
    so the bits one user draws never depend on how many the other drew.

    Parameters
    ----------
    seed : int
        Non-negative seed; the same seed always yields the same streams.
    """

    def __init__(self, seed: int = 0):
        if not isinstance(seed, (int, np.integer)) or seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
        self.seed = int(seed)
        children = np.random.SeedSequence(self.seed).spawn(2)
        self._rngs = [np.random.Generator(np.random.PCG64(c)) for c in children]
        self._buffers = [np.zeros(0, dtype=np.uint8), np.zeros(0, dtype=np.uint8)]
        self.drawn = [0, 0]

    def _ensure(self, k: int, upto: int):
        buf = self._buffers[k]
        while len(buf) < upto:
            chunk = self._rngs[k].integers(0, 2, size=CHUNK, dtype=np.uint8)
            buf = np.concatenate([buf, chunk])
        self._buffers[k] = buf

    def draw(self, user: int, count: int = 1) -> list:
        """Consume ``count`` fresh bits of ``user`` (1 or 2)."""
        k = _index(user)
        start = self.drawn[k]
        self._ensure(k, start + count)
        self.drawn[k] += count
        return [int(b) for b in self._buffers[k][start:start + count]]

    def bit(self, user: int, index: int) -> int:
        """Bit ``index`` (0-based) of ``user``'s stream."""
        k = _index(user)
        self._ensure(k, index + 1)
        return int(self._buffers[k][index])

    def peek(self, user: int, count: int) -> list:
        """The first ``count`` bits of ``user``'s stream, drawn or not."""
        k = _index(user)
        self._ensure(k, count)
        return [int(b) for b in self._buffers[k][:count]]


def _index(user: int) -> int:
    if user not in (1, 2):
        raise ValueError(f"user must be 1 or 2, got {user!r}")
    return user - 1
