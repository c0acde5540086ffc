"""Counter-based random streams.

Each stream is a Philox generator keyed by ``(master_seed, stream_id)``, so
replicas and time steps get independent, reproducible streams without any
shared state. Use :func:`derive_stream_id` to turn readable labels into ids.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_stream_id(*labels) -> int:
    """Stable 64-bit id for a tuple of labels (ints and strings)."""
    digest = hashlib.blake2b(repr(labels).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class RngStream:
    master_seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array(
                [self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64
            )
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def spawn(self, *labels) -> "RngStream":
        """Child stream; depends only on this stream's identity and the labels."""
        return RngStream(self.master_seed, derive_stream_id(self.stream_id, *labels))

    @classmethod
    def for_labels(cls, master_seed: int, *labels) -> "RngStream":
        return cls(master_seed, derive_stream_id(*labels))
