"""Deterministic RNG substream derivation.

Every stochastic stage of a run draws from its own generator, seeded by a
hash of (master seed, stage name, index).  The scheme is part of the
reproducibility contract: identical configuration and master seed yield
bit-identical results regardless of how work is split across workers,
because each unit of work (a synthesis stage, a detection block, a sweep
point) owns a substream that depends only on those three values.

The hash is BLAKE2b-128 of the ASCII string "master/stage/index"; the
digest, read as a little-endian integer, seeds a PCG64 generator.
"""

import hashlib

import numpy as np


def substream_seed(master: int, stage: str, index: int = 0) -> int:
    """Derive the integer seed for one named substream."""
    text = f"{master}/{stage}/{index}".encode("ascii")
    digest = hashlib.blake2b(text, digest_size=16).digest()
    return int.from_bytes(digest, "little")


def substream(master: int, stage: str, index: int = 0) -> np.random.Generator:
    """Generator for one named substream of the master seed."""
    return np.random.default_rng(substream_seed(master, stage, index))
