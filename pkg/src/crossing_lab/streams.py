"""Counter-based uniform streams keyed by ``(seed, stream, path_index)``.

The ``c``-th draw of a path is a pure function of its key and ``c``, so a
path sees the same numbers whether it is simulated alone, in a vectorized
batch, or on another thread.  The mixer is the SplitMix64 finalizer applied
to ``key + c * golden``, i.e. SplitMix64 started at ``key``.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))

JUMPS = 0
HOLDING = 1


def _mix(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> _S30)
    x = x * _M1
    x = x ^ (x >> _S27)
    x = x * _M2
    return x ^ (x >> _S31)


def path_keys(seed: int, paths, stream: int = JUMPS) -> np.ndarray:
    """One 64-bit key per path index."""
    paths = np.atleast_1d(np.asarray(paths, dtype=np.uint64))
    base = _mix(np.array([seed % 2**64], dtype=np.uint64) + np.array([stream + 1], dtype=np.uint64) * _GOLDEN)
    return _mix(_mix(base ^ (paths * _GOLDEN)) + _GOLDEN)


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Doubles in ``[0, 1)``, broadcasting ``keys`` against ``counters``."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    bits = _mix(keys + counters * _GOLDEN)
    return (bits >> _S11).astype(np.float64) * (1.0 / 2**53)
