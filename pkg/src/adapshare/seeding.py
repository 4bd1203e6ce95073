"""Stable seed derivation for reproducible multi-component experiments.

Python's builtin hash() is salted per process, so every derived seed goes
through SHA-256 of a canonical label string instead.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK63 = (1 << 63) - 1


def derive_seed(base_seed: int, *labels) -> int:
    """Derive a stable 63-bit seed from a base seed and a label path.

    Labels may be strings, ints, or floats; floats are canonicalized via
    repr() so 0.1 and 0.10 collide and 0.1 vs 0.2 never do.
    """
    parts = [str(int(base_seed))] + [repr(x) if isinstance(x, float) else str(x) for x in labels]
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & MASK63


def rng_for(base_seed: int, *labels) -> np.random.Generator:
    """A fresh PCG64 generator seeded from derive_seed(base_seed, *labels)."""
    return np.random.default_rng(derive_seed(base_seed, *labels))
