"""Reproducible random streams.

A single :class:`RngStream` owns a PCG64 generator.  Substreams obtained via
:meth:`RngStream.fork` are statistically independent of each other and of the
parent, and are a pure function of ``(seed, fork indices)``, so replications
and benchmark cells can run concurrently with fully reproducible results.
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """Seeded random stream with deterministic, independent substreams.

    Unknown attributes are delegated to the underlying
    :class:`numpy.random.Generator`, so draws read as ``rng.uniform(...)``,
    ``rng.standard_normal(...)`` etc.  A stream is single-owner: do not share
    one instance between concurrent tasks, fork instead.
    """

    def __init__(self, seed: int = 0, _seq: np.random.SeedSequence | None = None):
        self.seq = np.random.SeedSequence(seed) if _seq is None else _seq
        self.generator = np.random.Generator(np.random.PCG64(self.seq))

    def fork(self, index: int) -> "RngStream":
        """Return the ``index``-th child stream (same index, same stream)."""
        child = np.random.SeedSequence(
            entropy=self.seq.entropy, spawn_key=self.seq.spawn_key + (int(index),)
        )
        return RngStream(_seq=child)

    def __getattr__(self, name):
        return getattr(self.generator, name)

    def __repr__(self) -> str:
        return f"RngStream(entropy={self.seq.entropy}, spawn_key={self.seq.spawn_key})"


def as_stream(rng) -> RngStream:
    """Coerce ``rng`` (seed int, RngStream, or None) into an RngStream."""
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    return RngStream(int(rng))
