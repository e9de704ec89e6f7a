"""Counter-based random streams for reproducible, schedule-independent sampling.

Philox is a counter-based generator: output depends only on (key, counter),
never on call history.  ``SampleStream`` derives a key from (seed, tag) and
gives every sample index its own fixed window of draws, so the value of
sample ``i`` is identical no matter how the index range is partitioned into
blocks or spread across workers.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.random import Generator, Philox


class SampleStream:
    """Substream handle for one estimator run: key = (seed, tag).

    ``uniforms(start, count)`` yields a (count, width) block of float64
    uniforms in [0, 1); row ``r`` holds the draws owned by sample index
    ``start + r``.  ``width`` is the per-index draw budget and must be a
    multiple of 4 (Philox emits 4 words per counter tick).
    """

    def __init__(self, seed: int, tag: str, width: int = 64):
        if width <= 0 or width % 4 != 0:
            raise ValueError("width must be a positive multiple of 4")
        self.seed = int(seed)
        self.tag = str(tag)
        self.width = width
        digest = hashlib.sha256(f"{self.seed}:{self.tag}".encode()).digest()
        self._key = int.from_bytes(digest[:16], "little")

    def substream(self, sub: str) -> "SampleStream":
        return SampleStream(self.seed, f"{self.tag}/{sub}", self.width)

    def uniforms(self, start: int, count: int) -> np.ndarray:
        if count <= 0:
            return np.empty((0, self.width))
        bitgen = Philox(key=self._key, counter=start * (self.width // 4))
        flat = Generator(bitgen).random(count * self.width)
        return flat.reshape(count, self.width)


def stream_for(seed: int, estimator_tag: str, term_tag: str = "", width: int = 64) -> SampleStream:
    """Convenience: the substream used by one named term of one estimator run."""
    tag = estimator_tag if not term_tag else f"{estimator_tag}/{term_tag}"
    return SampleStream(seed, tag, width)
