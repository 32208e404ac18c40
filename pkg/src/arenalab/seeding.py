"""Deterministic seed derivation.

All nested randomness (per-arena spawn streams, per-episode seeds) is derived
from a parent seed through SHA-256 so runs are reproducible across platforms
and Python versions; the builtin hash() is salted and unusable here.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(*parts: object) -> int:
    """Mix arbitrary parts into a stable 63-bit seed."""
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_for(*parts: object) -> random.Random:
    return random.Random(derive_seed(*parts))
