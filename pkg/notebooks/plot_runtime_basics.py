"""
Runtime basics: placement, futures and transfer counters
========================================================

Every value lives on exactly one worker. Tasks run where their inputs are,
and anything fetched from elsewhere shows up in the metrics.
"""
import numpy as np

from spliterkit import Runtime, RuntimeConfig

rt = Runtime(RuntimeConfig(num_workers=2, sched_overhead=1000))

##############################################################################
# Put two arrays on different workers

a = rt.put(np.arange(4.0), worker=0)
b = rt.put(np.ones(4), worker=1)
print(rt.who_has([a, b]))

##############################################################################
# A task that needs both inputs runs on the worker holding more bytes.
# Ties go to the lower worker id, so ``b`` is fetched to worker 0.

fut = rt.submit("add", lambda x, y: x + y, [a, b])
print(fut.worker, rt.gather(fut))

m = rt.metrics_snapshot()
print("transfers:", m.transfers, "bytes:", m.bytes_transferred,
      "overhead ns:", m.accounted_overhead)

##############################################################################
# Futures can feed further tasks before they complete

doubled = rt.submit("double", lambda x: 2 * x, [fut])
print(rt.gather(doubled))
rt.shutdown()
