"""Deterministic seed derivation.

Every random draw in the toolkit comes from a generator seeded by a stable
hash of (root seed, purpose string, integer coordinates).  Results are
therefore independent of execution order and of how work is scheduled
across threads.
"""

import hashlib

import numpy as np


def derive_seed(root_seed: int, *parts) -> int:
    """Hash a root seed plus coordinate parts into a fresh 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(root_seed)).encode())
    for p in parts:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest(), "little")


def substream(root_seed: int, *parts) -> np.random.Generator:
    """Generator for an order-independent substream keyed by coordinates."""
    return np.random.default_rng(derive_seed(root_seed, *parts))
