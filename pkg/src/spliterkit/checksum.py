"""Order-sensitive 64-bit FNV-1a digests over array bytes."""
import numba
import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


@numba.njit(cache=True)
def _fnv1a(data, h):
    prime = np.uint64(FNV_PRIME)
    for b in data:
        h = (h ^ np.uint64(b)) * prime
    return h


def fnv1a_update(h, array):
    """Fold the little-endian bytes of ``array`` (C order) into state ``h``."""
    arr = np.asarray(array)
    if arr.dtype.kind == "f":
        arr = arr.astype("<f8", copy=False)
    elif arr.dtype.kind in "iub":
        arr = arr.astype("<i8", copy=False)
    data = np.ascontiguousarray(arr).reshape(-1).view(np.uint8)
    return int(_fnv1a(data, np.uint64(h)))


def fnv1a(*arrays):
    h = FNV_OFFSET
    for a in arrays:
        h = fnv1a_update(h, a)
    return h
