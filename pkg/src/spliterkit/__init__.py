"""Task runtime with blocked arrays and locality-aware partitions.

The pieces, bottom-up:

- :mod:`spliterkit.runtime` -- workers, object stores, futures, counters
- :mod:`spliterkit.blocked` -- row-blocked arrays and deterministic data
- :mod:`spliterkit.spliter` -- zero-copy per-worker partitions
- :mod:`spliterkit.rechunk` -- re-blocking by moving data
- :mod:`spliterkit.kernels` -- histogram, k-means, SMO SVM, KD-tree kNN
- :mod:`spliterkit.apps` -- the four applications in three modes
- :mod:`spliterkit.bench` -- experiment grids and CSV output
"""
from .apps import (APPS, MODES, AppConfig, run_app, run_csvm, run_histogram, run_kmeans, run_knn)
from .blocked import (BlockedArray, Explicit, GaussianBlobs, LabeledBlobs, RoundRobin, SeededRandom,
                      UniformCube, block_locations, checksum, create_array)
from .rechunk import balanced_block_rows, rechunk
from .runtime import DataRef, Future, Metrics, Runtime, RuntimeConfig, start_runtime
from .spliter import Partition, get_indexes, get_item_indexes, split

__version__ = "0.1.0"
