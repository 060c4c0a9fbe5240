"""Deterministic named RNG streams.

All randomness in the package flows through numpy's Philox generator, a
counter-based bit generator keyed through ``SeedSequence``.  A stream is
identified by a master seed plus a tuple of integers (cell index, trial
index, substream tag, ...); the same identifiers always reproduce the same
draws, and distinct identifiers give statistically independent streams.
Reports echo the master seed, so any run can be replayed bit-for-bit.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | tuple[int, ...]"


def normalize_seed(seed) -> tuple[int, ...]:
    """Coerce an int or tuple of ints into a stream identifier tuple."""
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    try:
        out = tuple(int(s) for s in seed)
    except TypeError:
        raise ValueError(f"seed must be an int or a tuple of ints, got {seed!r}")
    if not out:
        raise ValueError("seed tuple must not be empty")
    return out


def seed_sequence(seed) -> np.random.SeedSequence:
    parts = normalize_seed(seed)
    return np.random.SeedSequence(entropy=parts[0], spawn_key=parts[1:])


def make_rng(seed) -> np.random.Generator:
    """Generator for the given named stream (Philox, counter-based)."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed)))


def fresh_entropy() -> int:
    """Master seed from OS entropy, suitable for echoing back to the user."""
    return int(np.random.SeedSequence().entropy)
