"""Reproducible random streams with hierarchical substream paths."""

from __future__ import annotations

import numpy as np


class RandomStream:
    """A named, reproducible source of randomness.

    A stream is identified by a 64-bit root seed and a path of integer
    indices.  Streams with distinct paths are statistically independent and
    the same (seed, path) pair yields the identical draw sequence on every
    platform (Philox counter-based generator).  A stream is exclusive to one
    caller; derive children for concurrent or order-independent work.
    """

    __slots__ = ("root_seed", "path", "_gen")

    def __init__(self, root_seed: int, path: tuple[int, ...] = ()):
        if not 0 <= int(root_seed) < 2**64:
            raise ValueError("root_seed must fit in 64 bits")
        self.root_seed = int(root_seed)
        self.path = tuple(int(i) for i in path)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=self.root_seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen

    def child(self, *indices: int) -> "RandomStream":
        """Derive an independent substream at path + indices."""
        return RandomStream(self.root_seed, self.path + tuple(int(i) for i in indices))

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def provenance(self) -> dict:
        return {"root_seed": self.root_seed, "path": list(self.path)}

    def __repr__(self) -> str:
        return f"RandomStream(root_seed={self.root_seed}, path={self.path})"
