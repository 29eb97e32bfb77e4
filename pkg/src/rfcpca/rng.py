"""Seed derivation helpers.

All randomness in the package flows through numpy's PCG64 generator, and
child seeds are derived with SeedSequence so that every nested task (trial,
restart, grid candidate) gets an independent, platform-stable stream.
"""

from __future__ import annotations

import numpy as np

RNG_NAME = "numpy-pcg64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(*parts: int) -> int:
    """Deterministically fold integer parts into a single child seed."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
