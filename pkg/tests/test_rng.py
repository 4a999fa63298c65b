import numpy as np
from hypothesis import given, strategies as st

from spliterkit import rng


def test_splitmix64_reference_outputs():
    # published SplitMix64 outputs for state 0
    r = rng.Rng64(0)
    assert [r.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_uniform_uses_high_53_bits():
    a, b = rng.Rng64(1234), rng.Rng64(1234)
    assert a.uniform() == (b.next_u64() >> 11) / 2.0 ** 53


@given(seed=st.integers(0, 2**64 - 1), start=st.integers(0, 10_000), n=st.integers(1, 20),
       dims=st.integers(1, 5))
def test_vectorised_rows_match_scalar_stream(seed, start, n, dims):
    rows = rng.uniform_rows(seed, start, start + n, dims)
    for i in (0, n - 1):
        r = rng.Rng64(seed ^ (start + i + 1))
        assert rows[i].tolist() == [r.uniform() for _ in range(dims)]


def test_rows_do_not_depend_on_the_requested_range():
    whole = rng.normal_rows(7, 0, 50, 3)
    pieces = np.concatenate([rng.normal_rows(7, 0, 17, 3), rng.normal_rows(7, 17, 50, 3)])
    assert np.array_equal(whole, pieces)


def test_normals_look_standard():
    z = rng.normal_rows(3, 0, 40_000, 2)
    assert abs(z.mean()) < 0.02
    assert abs(z.std() - 1) < 0.02
