"""Deterministic hierarchical random-number streams.

Every stochastic routine in the package derives its generator from
``stream(base_seed, *keys)``.  Keys are either integers (e.g. a replication
index) or short role strings (e.g. "gibbs-beta"); strings are mapped to
stable 32-bit integers with CRC-32.  The resulting tuple feeds a
``numpy.random.SeedSequence``, so independent keys give statistically
independent, reproducible streams.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"stream keys must be nonnegative, got {key}")
        return int(key)
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"unsupported stream key type: {type(key)!r}")


def stream(base_seed: int, *keys) -> np.random.Generator:
    """Generator for the sub-stream identified by (base_seed, *keys)."""
    entropy = [_key_to_int(base_seed)] + [_key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
