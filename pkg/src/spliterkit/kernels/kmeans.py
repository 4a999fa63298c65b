"""Lloyd iteration pieces: per-block partial sums, merge, recompute."""
from typing import NamedTuple

import numpy as np


class PartialSums(NamedTuple):
    sums: np.ndarray
    counts: np.ndarray
    inertia: float


def assign(block, centers):
    """Nearest-center label and squared distance per point (ties -> lowest index)."""
    d2 = ((block[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(block)), labels]


def kmeans_partial(block, centers):
    block = np.asarray(block, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if block.ndim != 2 or block.shape[1] != centers.shape[1]:
        raise ValueError(f"block {block.shape} does not match centers {centers.shape}")
    k = len(centers)
    labels, d2 = assign(block, centers)
    sums = np.zeros_like(centers)
    for c in range(k):
        members = block[labels == c]
        if len(members):
            sums[c] = members.sum(axis=0)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return PartialSums(sums, counts, float(d2.sum()))


def kmeans_merge(parts):
    """Sum partials in the given order."""
    parts = list(parts)
    if not parts:
        raise ValueError("kmeans_merge needs at least one partial")
    sums = parts[0].sums.copy()
    counts = parts[0].counts.copy()
    inertia = parts[0].inertia
    for p in parts[1:]:
        sums += p.sums
        counts += p.counts
        inertia += p.inertia
    return PartialSums(sums, counts, inertia)


def kmeans_recompute(sums, counts, old_centers):
    """Mean of each cluster; empty clusters keep their previous center."""
    old_centers = np.asarray(old_centers, dtype=np.float64)
    counts = np.asarray(counts)
    new = old_centers.copy()
    nz = counts > 0
    new[nz] = sums[nz] / counts[nz, None]
    return new


def inertia(points, centers):
    return float(assign(np.asarray(points, float), np.asarray(centers, float))[1].sum())
