"""Counter-based random streams.

Every stochastic routine in the package draws from a keyed counter generator:
draw i of stream k is mix64(k + (i+1)*GOLDEN), the SplitMix64 output function.
Keys are derived by hashing (seed, label, ...) tuples with blake2b, so streams
are splittable by construction: per-entity, per-replicate, per-proposal streams
never overlap and never depend on iteration order or parallel scheduling.

The same integer recurrence is implemented three ways (scalar Python, vectorized
numpy, and inside the numba kernels in _compute.py); they agree bit for bit.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = np.uint64(1) << np.uint64(53)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_MASK = (1 << 64) - 1


def derive_key(*parts) -> int:
    """Hash a tuple of ints / floats / strings into a 64-bit stream key."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, (int, np.integer)):
            h.update(b"i")
            h.update(int(p).to_bytes(16, "little", signed=True))
        elif isinstance(p, (float, np.floating)):
            h.update(b"f")
            h.update(np.float64(p).tobytes())
        elif isinstance(p, str):
            h.update(b"s")
            h.update(len(p).to_bytes(8, "little"))
            h.update(p.encode("utf-8"))
        elif isinstance(p, bytes):
            h.update(b"b")
            h.update(len(p).to_bytes(8, "little"))
            h.update(p)
        else:
            raise TypeError(f"cannot derive key from {type(p).__name__}")
    return int.from_bytes(h.digest(), "little")


def _mix_int(x: int) -> int:
    """SplitMix64 finalizer on a plain Python int (modulo 2^64)."""
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK
    return x ^ (x >> 31)


def _raw_int(key: int, index: int) -> int:
    return _mix_int((key + (index + 1) * 0x9E3779B97F4A7C15) & _MASK)


def mix64(x):
    """SplitMix64 finalizer on uint64 scalars or arrays."""
    if np.isscalar(x):
        return np.uint64(_mix_int(int(x)))
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):  # modular uint64 arithmetic
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def raw64(key, index):
    """Output `index` (scalar or array) of stream `key`."""
    if isinstance(index, (int, np.integer)):
        return np.uint64(_raw_int(int(key), int(index)))
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(key) + (idx + np.uint64(1)) * _GOLDEN)


def uniform(key, index):
    """Uniform draw(s) in (0, 1]: ((raw >> 11) + 1) * 2^-53.

    The scalar and vector paths produce bit-identical floats: the shift, the
    increment, and the scale by an exact power of two are all exact in a
    53-bit significand.
    """
    if isinstance(index, (int, np.integer)):
        return ((_raw_int(int(key), int(index)) >> 11) + 1) * _INV53
    x = raw64(key, index)
    return ((x >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV53


class CounterStream:
    """Sequential view over a keyed stream; tracks the draw counter."""

    def __init__(self, key: int):
        self.key = int(np.uint64(key))
        self.counter = 0

    def _next(self) -> float:
        u = ((_raw_int(self.key, self.counter) >> 11) + 1) * _INV53
        self.counter += 1
        return u

    def _take(self, n: int) -> np.ndarray:
        if n <= 8:
            out = np.empty(n)
            for i in range(n):
                out[i] = self._next()
            return out
        idx = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        return uniform(self.key, idx)

    def uniform(self, n: int | None = None):
        if n is None:
            return self._next()
        return self._take(n)

    def exponential(self, scale: float = 1.0, n: int | None = None):
        u = self._take(1 if n is None else n)
        out = -np.log(u) * scale
        return float(out[0]) if n is None else out

    def normal(self, n: int | None = None):
        """Standard normals via Box-Muller; consumes two draws each."""
        m = 1 if n is None else n
        u = self._take(2 * m)
        r = np.sqrt(-2.0 * np.log(u[:m]))
        out = r * np.cos(2.0 * np.pi * u[m:])
        return float(out[0]) if n is None else out

    def integers(self, high: int, n: int | None = None):
        """Uniform ints in [0, high) by rejection-free scaling (high << 2^53)."""
        if n is None:
            return min(int(self._next() * high), high - 1)
        u = self._take(n)
        return np.minimum((u * high).astype(np.int64), high - 1)

    def shuffle_pick(self, n_total: int, n_pick: int) -> np.ndarray:
        """First n_pick indices of a seeded Fisher-Yates pass over range(n_total)."""
        idx = np.arange(n_total)
        for i in range(min(n_pick, n_total - 1)):
            j = i + self.integers(n_total - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:n_pick].copy()
