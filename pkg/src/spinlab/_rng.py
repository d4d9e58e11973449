"""Counter-based random streams.

Every stochastic routine derives its generator from a user seed plus a
structural path (replica index, tensor order, chunk number, ...) so that
results are reproducible bit-for-bit and independent of batching: stream
(seed, "replica", 7) yields the same numbers no matter which worker or
chunk consumes it.
"""
import hashlib

import numpy as np


def stream(seed: int, *path) -> np.random.Generator:
    """Philox generator keyed by a stable 128-bit hash of (seed, *path)."""
    token = repr((int(seed),) + tuple(path)).encode()
    digest = hashlib.blake2b(token, digest_size=16).digest()
    key = int.from_bytes(digest, "little")
    return np.random.Generator(np.random.Philox(key=key))


def child_seed(seed: int, *path) -> int:
    """A 63-bit integer seed derived from (seed, *path), for nested fields."""
    token = repr((int(seed),) + tuple(path)).encode()
    digest = hashlib.blake2b(token, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1
