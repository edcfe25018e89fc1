"""Deterministic counter-based random streams.

Every stochastic operation in the library draws from a Philox (counter-based)
generator keyed by a (seed, labels...) tuple.  Streams are independent of
scheduling order and degree of parallelism, so a fixed shard plan reproduces
results bit-for-bit.
"""

import hashlib

import numpy as np

ALGORITHM = "philox4x64"


def substream(seed: int, *labels) -> np.random.Generator:
    """Generator keyed by (seed, labels); same key -> identical draw sequence."""
    tag = repr((int(seed),) + tuple(str(l) for l in labels)).encode()
    key = int.from_bytes(hashlib.sha256(tag).digest()[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))
