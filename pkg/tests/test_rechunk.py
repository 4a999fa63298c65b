import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spliterkit.runtime import Runtime, RuntimeConfig
from spliterkit.blocked import Explicit, block_locations, checksum, create_array, to_numpy
from spliterkit.rechunk import balanced_block_rows, rechunk


def rechunk_bytes_oracle(owners, n_rows, old_rows, new_rows, n_workers, row_bytes):
    """Enumerate (destination block, overlapping source block) pairs on the original placement."""
    total = 0
    n_new = -(-n_rows // new_rows)
    for j in range(n_new):
        lo, hi = j * new_rows, min((j + 1) * new_rows, n_rows)
        for i, owner in enumerate(owners):
            s_lo, s_hi = i * old_rows, min((i + 1) * old_rows, n_rows)
            if s_lo < hi and lo < s_hi and owner != j % n_workers:
                total += (s_hi - s_lo) * row_bytes
    return total


def test_same_size_is_noop(rt2):
    arr = create_array(rt2, 10, 2, 3)
    before = rt2.metrics_snapshot()
    assert rechunk(rt2, arr, 3) is arr
    assert rt2.metrics_snapshot() == before


def test_merge_four_blocks_into_one(rt2):
    arr = create_array(rt2, 8, 1, 2)
    before = rt2.metrics_snapshot()
    out = rechunk(rt2, arr, 8)
    delta = rt2.metrics_snapshot() - before
    assert out.n_blocks == 1 and block_locations(rt2, out) == [0]
    # blocks 1 and 3 live on w1: 2 rows x 8 bytes each
    assert delta.bytes_transferred == 32 and delta.transfers == 2
    assert delta.tasks_by_kind == {"rechunk": 1}
    assert checksum(rt2, out) == checksum(rt2, arr)


def test_invalid_size(rt2):
    arr = create_array(rt2, 8, 1, 2)
    with pytest.raises(ValueError):
        rechunk(rt2, arr, 0)
    with pytest.raises(ValueError):
        rechunk(rt2, arr, 9)


def test_source_array_untouched(rt2):
    arr = create_array(rt2, 30, 3, 4, seed=2)
    owners, digest = block_locations(rt2, arr), checksum(rt2, arr)
    rechunk(rt2, arr, 7)
    assert block_locations(rt2, arr) == owners and checksum(rt2, arr) == digest


def test_balanced_block_rows(make_runtime):
    rt = make_runtime(2)
    assert balanced_block_rows(create_array(rt, 96, 1, 8), rt) == 48
    assert balanced_block_rows(create_array(rt, 1, 1, 1), rt) == 1
    rt22 = make_runtime(2, threads_per_worker=2)
    assert balanced_block_rows(create_array(rt22, 7, 1, 1), rt22) == 2


@settings(max_examples=40, deadline=None)
@given(workers=st.integers(1, 5), n_rows=st.integers(1, 60), data=st.data())
def test_rechunk_content_and_exact_bytes(workers, n_rows, data):
    with Runtime(RuntimeConfig(workers)) as rt:
        old = data.draw(st.integers(1, n_rows))
        new = data.draw(st.integers(1, n_rows))
        n_blocks = -(-n_rows // old)
        owners = tuple(data.draw(st.lists(st.integers(0, workers - 1), min_size=n_blocks,
                                          max_size=n_blocks)))
        arr = create_array(rt, n_rows, 3, old, Explicit(owners), seed=n_rows)
        before = rt.metrics_snapshot()
        out = rechunk(rt, arr, new)
        delta = rt.metrics_snapshot() - before

        assert np.array_equal(to_numpy(rt, out), to_numpy(rt, arr))
        assert checksum(rt, out) == checksum(rt, arr)
        expected = 0 if new == old else rechunk_bytes_oracle(owners, n_rows, old, new, workers, 24)
        assert delta.bytes_transferred == expected
        if new != old:
            assert block_locations(rt, out) == [j % workers for j in range(out.n_blocks)]
            assert delta.copied_bytes == n_rows * 24
