"""Shared helpers: deterministic sub-seeding and float formatting."""

from __future__ import annotations

import hashlib
import random


def substream_seed(seed: int, *names: object) -> int:
    """Derive an independent 64-bit seed from a master seed and a name path.

    Uses SHA-256 so the result is stable across processes and platforms
    (unlike hash() of a string, which depends on PYTHONHASHSEED).
    """
    key = "{}:{}".format(seed, ":".join(str(n) for n in names))
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, *names: object) -> random.Random:
    """A named, reproducible RNG forked from the master seed."""
    return random.Random(substream_seed(seed, *names))


def fmt6(value: float | None) -> str:
    """Render a number with exactly six fractional digits; None becomes empty."""
    if value is None:
        return ""
    return "%.6f" % value
