"""Reproducible random streams keyed by ``(seed, stream id, ...)``.

Every consumer of randomness asks for its own stream, so results never
depend on the order in which replicates or curves are processed.
"""

from __future__ import annotations

import numpy as np

# Top-level stream ids. Keeping them in one place avoids accidental reuse.
DATA = 0
CALIBRATION = 1
ALTERNATIVE = 2
REFERENCE = 3


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``seed`` and the integer path ``key``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed derived from ``(seed, key)``.

    Used where a child computation takes a plain integer seed (for example
    the calibration draws of one replicate).
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
