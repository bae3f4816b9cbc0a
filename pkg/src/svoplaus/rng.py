"""Deterministic random streams shared by every component.

All randomness flows through numpy's Philox bit generator, a counter-based
PRNG whose output for a given key is identical on every platform. Work that
may run in parallel (shard extraction, grid cells, epoch shuffles) draws
from sub-streams derived from the base seed and the unit's index, so
results never depend on scheduling order.

Derivation rule: the first index is XORed into the seed unchanged, further
indices are multiplied by fixed odd 64-bit constants before XOR. A plain
``derive_seed(seed, i)`` therefore equals ``seed ^ i``.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

_MASK64 = (1 << 64) - 1
_POSITION_MIX = (1, 0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9)


class Stream(IntEnum):
    """Purpose tags separating the random streams spawned from one seed."""

    INIT = 1
    EPOCH = 2
    POSITIVES = 3
    NEGATIVES = 4
    SHUFFLE = 5
    REPEAT = 6
    SPLIT = 7
    GRID = 8
    MODEL = 9
    SYNTH = 10


def derive_seed(seed: int, *indices: int) -> int:
    """Mix a base seed with stream indices into a new 64-bit seed."""
    if len(indices) >= len(_POSITION_MIX):
        raise ValueError("too many stream indices")
    out = int(seed) & _MASK64
    for pos, idx in enumerate(indices):
        out ^= (int(idx) * _POSITION_MIX[pos]) & _MASK64
    return out


def make_rng(seed: int, *indices: int) -> np.random.Generator:
    """Generator for the stream identified by ``seed`` and ``indices``."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *indices)))
