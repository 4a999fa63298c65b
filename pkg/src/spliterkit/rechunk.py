"""Materialise a blocked array with a different block size.

New block ``j`` is assembled by a task on worker ``j % num_workers``. Every
source block overlapping it is an input of that task, so any source block
held elsewhere is fetched whole and counted once per destination block.
"""
from __future__ import annotations

import numpy as np

from .blocked import BlockedArray, from_blocks, n_blocks_for
from .runtime import Runtime

RECHUNK_KIND = "rechunk"


def _assemble(slices):
    def run(*blocks):
        return np.concatenate([b[lo:hi] for b, (lo, hi) in zip(blocks, slices)], axis=0)
    return run


def rechunk(rt: Runtime, arr: BlockedArray, new_block_rows) -> BlockedArray:
    if not 1 <= new_block_rows <= arr.n_rows:
        raise ValueError(f"new_block_rows must be in [1, {arr.n_rows}], got {new_block_rows}")
    if new_block_rows == arr.block_rows:
        return arr
    old = arr.block_rows
    futures = []
    for j in range(n_blocks_for(arr.n_rows, new_block_rows)):
        start = j * new_block_rows
        stop = min(start + new_block_rows, arr.n_rows)
        first, last = start // old, (stop - 1) // old
        inputs, slices = [], []
        for i in range(first, last + 1):
            b0 = i * old
            inputs.append(arr.blocks[i])
            slices.append((max(start, b0) - b0, min(stop, b0 + old) - b0))
        dest = j % rt.num_workers
        futures.append(rt.submit(RECHUNK_KIND, _assemble(slices), inputs, worker=dest))
        rt.add_copied_bytes((stop - start) * arr.dims * 8)
    refs = []
    for f in futures:
        f.wait()
        if f.state == "failed":
            raise f.exception()
        refs.append(f.ref)
    return from_blocks(arr.n_rows, arr.dims, new_block_rows, refs, like=arr)


def balanced_block_rows(arr: BlockedArray, rt: Runtime):
    """Rows per block for one block per worker thread."""
    slots = rt.num_workers * rt.config.threads_per_worker
    return -(-arr.n_rows // slots)
