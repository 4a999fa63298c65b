"""Row-blocked 2-D arrays distributed over runtime workers.

Block ``i`` holds global rows ``[i * block_rows, min((i + 1) * block_rows, n_rows))``
as a C-ordered float64 matrix stored on exactly one worker. Row values
are a pure function of ``(seed, row)``, so two arrays with the same seed
and shape hold the same data whatever their blocking.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .checksum import FNV_OFFSET, fnv1a_update
from .runtime import Runtime


# -- placement ---------------------------------------------------------------

@dataclass(frozen=True)
class RoundRobin:
    def owners(self, n_blocks, n_workers):
        return [i % n_workers for i in range(n_blocks)]


@dataclass(frozen=True)
class SeededRandom:
    seed: int

    def owners(self, n_blocks, n_workers):
        r = rng.Rng64(self.seed)
        return [r.randbelow(n_workers) for _ in range(n_blocks)]


@dataclass(frozen=True)
class Explicit:
    workers: tuple

    def owners(self, n_blocks, n_workers):
        if len(self.workers) != n_blocks:
            raise ValueError(
                f"explicit placement lists {len(self.workers)} workers for {n_blocks} blocks"
            )
        return [int(w) for w in self.workers]


# -- generators --------------------------------------------------------------

@dataclass(frozen=True)
class UniformCube:
    """Each coordinate uniform in [0, 1)."""

    def rows(self, seed, start, stop, dims):
        return rng.uniform_rows(seed, start, stop, dims)


@dataclass(frozen=True)
class GaussianBlobs:
    """Isotropic blobs; row ``r`` belongs to blob ``r % k``.

    Blob ``c`` is centred on ``scale * e_c``; with ``k == dims + 1`` the
    last blob sits at the origin, completing the simplex.
    """

    k: int = 4
    spread: float = 1.0
    scale: float = 10.0

    def centers(self, dims):
        if not 1 <= self.k <= dims + 1:
            raise ValueError(f"GaussianBlobs needs 1 <= k <= dims + 1 (k={self.k}, dims={dims})")
        c = np.zeros((self.k, dims))
        for i in range(min(self.k, dims)):
            c[i, i] = self.scale
        return c

    def rows(self, seed, start, stop, dims):
        blob = np.arange(start, stop) % self.k
        return self.centers(dims)[blob] + self.spread * rng.normal_rows(seed, start, stop, dims)


@dataclass(frozen=True)
class LabeledBlobs:
    """Two blobs ``separation`` apart along the first axis.

    Even rows come from the blob at the origin (label -1), odd rows from
    the shifted one (label +1).
    """

    separation: float = 10.0
    spread: float = 1.0

    def rows(self, seed, start, stop, dims):
        out = self.spread * rng.normal_rows(seed, start, stop, dims)
        out[:, 0] += self.separation * (np.arange(start, stop) % 2)
        return out

    def labels(self, start, stop):
        return np.where(np.arange(start, stop) % 2 == 1, 1.0, -1.0).reshape(-1, 1)


# -- array -------------------------------------------------------------------

@dataclass
class BlockedArray:
    n_rows: int
    dims: int
    block_rows: int
    blocks: list = field(repr=False)
    seed: int | None = None
    generator: object = None

    @property
    def n_blocks(self):
        return len(self.blocks)

    def block_range(self, i):
        start = i * self.block_rows
        return start, min(start + self.block_rows, self.n_rows)

    def block_sizes(self):
        return [min(self.block_rows, self.n_rows - i * self.block_rows) for i in range(self.n_blocks)]

    @property
    def nbytes(self):
        return self.n_rows * self.dims * 8


def n_blocks_for(n_rows, block_rows):
    return -(-n_rows // block_rows)


def create_array(rt: Runtime, n_rows, dims, block_rows, policy=None, gen=None, seed=0):
    """Generate an array block by block and place each block with ``put``."""
    if n_rows < 1 or dims < 1:
        raise ValueError(f"need n_rows >= 1 and dims >= 1, got {n_rows}, {dims}")
    if not 1 <= block_rows <= n_rows:
        raise ValueError(f"block_rows must be in [1, {n_rows}], got {block_rows}")
    policy = policy or RoundRobin()
    gen = gen or UniformCube()
    n_blocks = n_blocks_for(n_rows, block_rows)
    owners = policy.owners(n_blocks, rt.num_workers)
    blocks = []
    for i, w in enumerate(owners):
        start = i * block_rows
        stop = min(start + block_rows, n_rows)
        blocks.append(rt.put(gen.rows(seed, start, stop, dims), w))
    return BlockedArray(n_rows, dims, block_rows, blocks, seed, gen)


def create_labels(rt: Runtime, points: BlockedArray):
    """Label column for a :class:`LabeledBlobs` array, blocked and placed like it."""
    gen = points.generator
    if not isinstance(gen, LabeledBlobs):
        raise TypeError("labels are only defined for LabeledBlobs data")
    owners = block_locations(rt, points)
    blocks = []
    for i, w in enumerate(owners):
        start, stop = points.block_range(i)
        blocks.append(rt.put(gen.labels(start, stop), w))
    return BlockedArray(points.n_rows, 1, points.block_rows, blocks, points.seed, None)


def from_blocks(n_rows, dims, block_rows, blocks, like=None):
    seed = like.seed if like is not None else None
    gen = like.generator if like is not None else None
    return BlockedArray(n_rows, dims, block_rows, list(blocks), seed, gen)


def block_locations(rt: Runtime, arr: BlockedArray):
    return rt.who_has(arr.blocks)


def checksum(rt: Runtime, arr: BlockedArray):
    """FNV-1a over every element's 8 bytes in global row order."""
    h = FNV_OFFSET
    for ref in arr.blocks:
        h = fnv1a_update(h, rt.peek(ref))
    return h


def to_numpy(rt: Runtime, arr: BlockedArray):
    """Assemble the whole array at the coordinator (debugging helper)."""
    return np.concatenate([rt.peek(ref) for ref in arr.blocks], axis=0)


def to_csv(rt: Runtime, arr: BlockedArray, path):
    """Dump one row per point, full float precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for ref in arr.blocks:
            for row in rt.peek(ref):
                writer.writerow([repr(float(v)) for v in row])
