"""Shared numeric primitives: stable nonlinear maps, seeded random streams,
and array validation helpers.

Everything in this package computes in 64-bit floating point on row-major
numpy arrays.  All randomness flows through :class:`RandomStream`, built on
numpy's PCG64 bit generator; the generator family, the uniform-draw
conversion and the child-seed derivation rule are fixed for the life of the
model file format so that a recorded master seed replays an experiment
exactly (see docs/model_format.md).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import ConfigError

_UINT64_MASK = 0xFFFFFFFFFFFFFFFF


def as_float_matrix(values, name="matrix"):
    """Coerce to a 2-D float64 array and require finite entries."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_float_vector(values, name="vector"):
    """Coerce to a 1-D float64 array and require finite entries."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def sigmoid(x):
    """Logistic map 1/(1+exp(-x)), saturating without overflow."""
    return special.expit(x)


def softmax(values, axis=-1):
    """Max-subtracted softmax along ``axis``; outputs sum to 1."""
    return special.softmax(np.asarray(values, dtype=np.float64), axis=axis)


def child_seed(seed, *key):
    """Derive a 64-bit seed from a master seed and an integer key path.

    Uses numpy's SeedSequence entropy hashing, so distinct key paths give
    independent, reproducible streams without consuming parent draws.
    """
    entropy = (int(seed) & _UINT64_MASK,) + tuple(int(k) for k in key)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


class RandomStream:
    """Deterministic stream of float64 draws with a draw counter.

    Identical seeds give identical draw sequences on every platform.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _UINT64_MASK
        self.position = 0
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, position={self.position})"

    def _count(self, size):
        if size is None:
            return 1
        if np.isscalar(size):
            return int(size)
        return int(np.prod(size))

    def uniform(self, size=None):
        """Draws in [0, 1)."""
        self.position += self._count(size)
        return self._gen.random(size)

    def normal(self, size=None):
        """Standard normal draws."""
        self.position += self._count(size)
        return self._gen.standard_normal(size)

    def child(self, *key):
        """Independent stream derived from this stream's seed and ``key``."""
        return RandomStream(child_seed(self.seed, *key))


def subsample_indices(n, fraction, stream):
    """Draw ceil(fraction*n) distinct indices in [0, n) without replacement.

    Uniform via partial Fisher-Yates on the stream's draws; the returned
    indices are sorted.  fraction must lie in (0, 1].
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"subsample fraction must be in (0, 1], got {fraction}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = math.ceil(fraction * n)
    pool = np.arange(n)
    if k >= n:
        return pool
    u = stream.uniform(k)
    for i in range(k):
        j = i + int(u[i] * (n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:k])


def permutation(n, stream):
    """Uniform permutation of [0, n) via Fisher-Yates on the stream."""
    pool = np.arange(n)
    if n < 2:
        return pool
    u = stream.uniform(n - 1)
    for i in range(n - 1):
        j = i + int(u[i] * (n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return pool
