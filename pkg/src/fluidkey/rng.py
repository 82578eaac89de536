"""Reproducible random-stream management.

Every stochastic component draws from a child generator derived from
(seed, purpose-tag, index).  Child streams are statistically independent,
so any parallel execution schedule reproduces the sequential results.
"""

import zlib

import numpy as np

__all__ = ["stream"]


def _tag_key(tag: str) -> int:
    # crc32 is stable across processes (unlike the salted builtin hash)
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator keyed by (seed, tag, index)."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return np.random.default_rng(np.random.SeedSequence([int(seed), _tag_key(tag), int(index)]))
