"""SplitMix64 generator, scalar and row-vectorised.

Every dataset row is drawn from its own freshly seeded stream
(``seed ^ (row + 1)``), so the values of a row never depend on how the
array is blocked.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
TWO_POW_53 = float(1 << 53)


class Rng64:
    """Scalar SplitMix64 stream."""

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        """Double in [0, 1) from the high 53 bits."""
        return (self.next_u64() >> 11) / TWO_POW_53

    def randbelow(self, n):
        # modulo bias is irrelevant for the index choices this is used for
        return self.next_u64() % n


_GOLDEN_U = np.uint64(GOLDEN)
_MIX1_U = np.uint64(MIX1)
_MIX2_U = np.uint64(MIX2)


def row_states(seed, start, stop):
    """Initial per-row states ``seed ^ (r + 1)`` for rows ``[start, stop)``."""
    rows = np.arange(start + 1, stop + 1, dtype=np.uint64)
    return rows ^ np.uint64(seed & MASK64)


def next_u64(states):
    """Advance ``states`` in place and return one output per stream."""
    with np.errstate(over="ignore"):
        states += _GOLDEN_U
        z = states.copy()
        z ^= z >> np.uint64(30)
        z *= _MIX1_U
        z ^= z >> np.uint64(27)
        z *= _MIX2_U
        z ^= z >> np.uint64(31)
    return z


def next_uniform(states):
    return (next_u64(states) >> np.uint64(11)).astype(np.float64) / TWO_POW_53


def uniform_rows(seed, start, stop, dims):
    """``(stop - start, dims)`` uniforms; column j is the j-th draw of each row."""
    states = row_states(seed, start, stop)
    out = np.empty((stop - start, dims), dtype=np.float64)
    for j in range(dims):
        out[:, j] = next_uniform(states)
    return out


def normal_rows(seed, start, stop, dims):
    """Standard normals via Box-Muller, one pair of uniforms per two columns."""
    states = row_states(seed, start, stop)
    out = np.empty((stop - start, dims), dtype=np.float64)
    for j in range(0, dims, 2):
        u1 = next_uniform(states)
        u2 = next_uniform(states)
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        out[:, j] = radius * np.cos(2.0 * np.pi * u2)
        if j + 1 < dims:
            out[:, j + 1] = radius * np.sin(2.0 * np.pi * u2)
    return out
