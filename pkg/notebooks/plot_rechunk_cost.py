"""
What rechunking costs
=====================

Rechunking to bigger blocks also cuts the task count, but it has to pull
foreign blocks onto each destination worker.
"""
from spliterkit import Runtime, RuntimeConfig, create_array, rechunk
from spliterkit.blocked import block_locations, checksum
from spliterkit.rechunk import balanced_block_rows

rt = Runtime(RuntimeConfig(num_workers=4))
arr = create_array(rt, n_rows=4096, dims=3, block_rows=64)

target = balanced_block_rows(arr, rt)
before = rt.metrics_snapshot()
big = rechunk(rt, arr, target)
delta = rt.metrics_snapshot() - before

print(arr.n_blocks, "blocks ->", big.n_blocks, "blocks of", target, "rows")
print("moved fraction:", delta.bytes_transferred / arr.nbytes)
print("new owners:", block_locations(rt, big))
print("same content:", checksum(rt, big) == checksum(rt, arr))

##############################################################################
# Asking for the current size is free

before = rt.metrics_snapshot()
assert rechunk(rt, arr, 64) is arr
print("no-op delta:", (rt.metrics_snapshot() - before).as_dict())
rt.shutdown()
