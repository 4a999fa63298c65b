"""Dense n-dimensional histograms with uniform bins."""
from dataclasses import dataclass
from functools import reduce

import numpy as np


@dataclass(frozen=True)
class HistogramSpec:
    dims: int
    bins_per_dim: int
    lo: tuple = None
    hi: tuple = None

    def __post_init__(self):
        if self.dims < 1 or self.bins_per_dim < 1:
            raise ValueError("dims and bins_per_dim must be >= 1")
        lo = (0.0,) * self.dims if self.lo is None else tuple(float(v) for v in self.lo)
        hi = (1.0,) * self.dims if self.hi is None else tuple(float(v) for v in self.hi)
        if len(lo) != self.dims or len(hi) != self.dims:
            raise ValueError("lo/hi must have one entry per dimension")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("need lo < hi in every dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def shape(self):
        return (self.bins_per_dim,) * self.dims


def histogramdd(block, spec: HistogramSpec, return_discarded=False):
    """Count points per bin.

    Coordinate ``x`` goes to bin ``floor((x - lo) / (hi - lo) * bins)``;
    ``x == hi`` is kept in the last bin, anything outside ``[lo, hi]`` (or
    NaN) is discarded.
    """
    block = np.asarray(block, dtype=np.float64).reshape(-1, spec.dims)
    bins = spec.bins_per_dim
    lo = np.asarray(spec.lo)
    hi = np.asarray(spec.hi)
    inside = np.all((block >= lo) & (block <= hi), axis=1)
    kept = block[inside]
    idx = np.floor((kept - lo) / (hi - lo) * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    flat = np.ravel_multi_index(tuple(idx.T), spec.shape) if len(idx) else np.empty(0, np.int64)
    counts = np.bincount(flat, minlength=bins ** spec.dims).astype(np.int64).reshape(spec.shape)
    if return_discarded:
        return counts, int(len(block) - len(kept))
    return counts


def sum_counts(parts):
    """Element-wise sum, folded left to right."""
    parts = list(parts)
    if not parts:
        raise ValueError("sum_counts needs at least one tensor")
    return reduce(np.add, parts[1:], np.array(parts[0], dtype=np.int64, copy=True))
