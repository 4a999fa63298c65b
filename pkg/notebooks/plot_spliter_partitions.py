"""
Grouping blocks into per-worker partitions
==========================================

``split`` asks where each block lives and hands back one partition per
worker (or a few, with ``partitions_per_worker``). No data moves.
"""
import numpy as np

from spliterkit import Runtime, RuntimeConfig, create_array, split
from spliterkit.blocked import SeededRandom, block_locations

rt = Runtime(RuntimeConfig(num_workers=3))
arr = create_array(rt, n_rows=40, dims=2, block_rows=4, policy=SeededRandom(5))
print("owners:", block_locations(rt, arr))

before = rt.metrics_snapshot()
parts = split(rt, arr, partitions_per_worker=2)
for p in parts:
    print(p.worker, p.get_indexes(), p.get_item_indexes()[:6], "...")
print("bytes moved by split:", (rt.metrics_snapshot() - before).bytes_transferred)

##############################################################################
# One task per partition instead of one per block

sums = [rt.submit("colsum", lambda *blocks: np.vstack(blocks).sum(axis=0),
                  p.block_refs, worker=p.worker) for p in parts]
print(np.sum([rt.gather(s) for s in sums], axis=0))
rt.shutdown()
