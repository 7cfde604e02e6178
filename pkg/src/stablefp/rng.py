"""Seedable uniform streams with independent substreams.

All variate transforms in this package assume uniforms strictly inside
(0,1); draws are taken as (k + 0.5) / 2^53 over random 53-bit integers so
neither endpoint can occur.
"""

from __future__ import annotations

import numpy as np

_TWO53 = float(1 << 53)


class RandomStream:
    """PCG64 stream identified by (seed, stream_id).

    Identical (seed, stream_id) reproduce bit-identical output; distinct
    stream_ids are statistically independent (SeedSequence spawn keys).
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def substream(self, offset: int) -> "RandomStream":
        """Independent stream derived from the same seed."""
        return RandomStream(self.seed, self.stream_id + 1 + int(offset))

    def uniform(self) -> float:
        """One uniform in the open interval (0,1)."""
        return (self._gen.integers(0, 1 << 53) + 0.5) / _TWO53

    def uniforms(self, n: int) -> np.ndarray:
        """Array of n uniforms in (0,1)."""
        return (self._gen.integers(0, 1 << 53, size=int(n)) + 0.5) / _TWO53

    def exponential(self, n: int | None = None):
        if n is None:
            return -np.log(self.uniform())
        return -np.log(self.uniforms(n))
