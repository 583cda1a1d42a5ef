"""Reproducible random streams and ordered block execution.

Every estimator owns a stream identified by (seed, path) and derives child
streams by extending the path.  Worker blocks always reduce in block-index
order, so totals are bit-identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class RandomStream:
    """A position in the seed tree; cheap to copy, never shares state."""

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *indices: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(stream) -> np.random.Generator:
    """Accept either a RandomStream or an already-built Generator."""
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, RandomStream):
        return stream.generator()
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(stream)!r}")


def map_blocks(n_blocks: int, work: Callable[[int], object], threads: int = 1) -> list:
    """Run work(block_index) for each block, returning results in block order.

    Each block must be self-contained (own derived stream); the fixed
    gather order is what makes parallel runs reproducible.
    """
    if threads <= 1 or n_blocks <= 1:
        return [work(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(work, range(n_blocks)))


def block_ranges(total: int, block_size: int) -> Sequence[tuple[int, int]]:
    """Split range(total) into consecutive blocks of at most block_size."""
    edges = list(range(0, total, block_size)) + [total]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]
