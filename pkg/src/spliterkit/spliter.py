"""Locality-aware logical partitions over a blocked array.

:func:`split` asks the runtime where every block lives (one batched
query) and groups the blocks of each worker into partitions. Nothing is
read, copied or moved: a partition is only a list of references plus the
index bookkeeping needed to recover the original order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocked import BlockedArray, block_locations
from .runtime import Runtime


@dataclass(frozen=True)
class Partition:
    worker: int
    block_refs: tuple
    block_indexes: tuple
    item_ranges: tuple

    def __post_init__(self):
        if not len(self.block_refs) == len(self.block_indexes) == len(self.item_ranges):
            raise ValueError("partition fields must have equal length")
        if any(a >= b for a, b in zip(self.block_indexes, self.block_indexes[1:])):
            raise ValueError("block indexes must be strictly ascending")

    def __iter__(self):
        return iter(self.block_refs)

    def __len__(self):
        return len(self.block_refs)

    @property
    def n_items(self):
        return sum(stop - start for start, stop in self.item_ranges)

    def get_indexes(self):
        return list(self.block_indexes)

    def get_item_indexes(self):
        if not self.item_ranges:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([np.arange(a, b, dtype=np.int64) for a, b in self.item_ranges])


def get_indexes(p: Partition):
    """Global block index of each block in ``p``, ascending."""
    return p.get_indexes()


def get_item_indexes(p: Partition):
    """Global row index of every point in ``p``, block by block."""
    return p.get_item_indexes()


def _near_equal(items, parts):
    q, r = divmod(len(items), parts)
    out, pos = [], 0
    for j in range(parts):
        size = q + (j < r)
        if size:
            out.append(items[pos:pos + size])
        pos += size
    return out


def split(rt: Runtime, arr: BlockedArray, partitions_per_worker=1):
    """Partitions of ``arr``, ordered by (worker, sub-group).

    Each worker's blocks, in ascending index order, are cut into
    ``partitions_per_worker`` contiguous groups whose sizes differ by at
    most one. Empty groups are dropped.
    """
    if partitions_per_worker < 1:
        raise ValueError("partitions_per_worker must be >= 1")
    owners = block_locations(rt, arr)
    by_worker = {}
    for i, w in enumerate(owners):
        by_worker.setdefault(w, []).append(i)
    parts = []
    for w in sorted(by_worker):
        for group in _near_equal(by_worker[w], partitions_per_worker):
            parts.append(Partition(
                worker=w,
                block_refs=tuple(arr.blocks[i] for i in group),
                block_indexes=tuple(group),
                item_ranges=tuple(arr.block_range(i) for i in group),
            ))
    return parts
