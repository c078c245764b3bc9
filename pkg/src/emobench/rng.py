"""Named deterministic random streams.

Every stochastic step in the package (splits, shuffles, bootstraps, weight
init) draws from its own stream addressed by (seed, *path). Streams are
PCG64 generators keyed through numpy's SeedSequence spawn mechanism, so they
are independent of each other, stable across platforms and numpy versions,
and insensitive to how many other streams exist or in which order they are
created. That last property is what makes thread-parallel training
reproducible: worker count never changes what any stream yields.
"""

from __future__ import annotations

import zlib

import numpy as np


def _path_key(part) -> int:
    # string path parts hash through crc32: stable, unlike Python's hash()
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream path ints must be >= 0, got {part}")
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def stream(seed: int, *path) -> np.random.Generator:
    """Return the generator for (seed, *path). Same arguments, same stream."""
    key = tuple(_path_key(p) for p in path)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))
