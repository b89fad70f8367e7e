"""Deterministic seed derivation for independent random streams."""

import hashlib

import numpy as np

STREAMS = ("train", "valid", "test", "init", "shuffle")


def hash64(*parts) -> int:
    """Stable 64-bit integer derived from the ``repr`` of each part."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def stream_seed(base_seed: int, replication: int, tag: str) -> int:
    if tag not in STREAMS:
        raise ValueError(f"unknown stream tag {tag!r}; expected one of {STREAMS}")
    return hash64(int(base_seed), int(replication), tag)


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Generator for ``seed``, optionally split further by string tags."""
    if tags:
        seed = hash64(int(seed), *tags)
    return np.random.default_rng(int(seed))
